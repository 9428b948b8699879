"""Structured artifacts parsed from action responses, plus their fingerprints.

A fingerprint identifies the artifact's semantic payload (normalized SQL,
sorted schema map, collapsed text) so that expansion samples which say the
same thing collapse into one search-tree child. Rationale text never enters
the fingerprint.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from ..core.types import ActionKind, NodeState
from ..errors import ContractViolation


@dataclass(frozen=True)
class RephrasedQuestion:
    text: str


@dataclass(frozen=True)
class SchemaSubset:
    tables: dict[str, list[str]] = field(default_factory=dict)
    rationale: str = ""


@dataclass(frozen=True)
class ValueNotes:
    text: str


@dataclass(frozen=True)
class FunctionNotes:
    text: str


@dataclass(frozen=True)
class GeneratedSql:
    sql: str
    rationale: str = ""


@dataclass(frozen=True)
class RevisedSql:
    sql: str
    rationale: str = ""
    rounds_used: int = 0
    # prompt context this revision was produced from, for later re-issue
    from_sql: str = ""
    from_result: str = ""


@dataclass(frozen=True)
class Terminated:
    pass


ActionArtifact = (
    RephrasedQuestion
    | SchemaSubset
    | ValueNotes
    | FunctionNotes
    | GeneratedSql
    | RevisedSql
    | Terminated
)


def normalize_sql(sql: str) -> str:
    return " ".join(sql.split()).rstrip(";").strip()


def _collapse(text: str) -> str:
    return " ".join(text.split())


def _canonical(artifact: ActionArtifact) -> list:
    if isinstance(artifact, RephrasedQuestion):
        return ["A1", _collapse(artifact.text)]
    if isinstance(artifact, SchemaSubset):
        ordered = {t: sorted(cols) for t, cols in sorted(artifact.tables.items())}
        return ["A2", json.dumps(ordered, sort_keys=True, separators=(",", ":"))]
    if isinstance(artifact, ValueNotes):
        return ["A3", _collapse(artifact.text)]
    if isinstance(artifact, FunctionNotes):
        return ["A4", _collapse(artifact.text)]
    if isinstance(artifact, GeneratedSql):
        return ["A5", normalize_sql(artifact.sql)]
    if isinstance(artifact, RevisedSql):
        return ["A6", normalize_sql(artifact.sql)]
    if isinstance(artifact, Terminated):
        return ["A7"]
    raise ContractViolation(f"unknown artifact type {type(artifact).__name__}")


def fingerprint(artifact: ActionArtifact) -> str:
    material = json.dumps(_canonical(artifact), separators=(",", ":"),
                          ensure_ascii=False)
    return hashlib.sha1(material.encode("utf-8")).hexdigest()[:16]


def apply_artifact(state: NodeState, action: ActionKind,
                   artifact: ActionArtifact, raw: str) -> NodeState:
    """New NodeState with the artifact folded in and the raw response logged."""
    new = state.copy()
    if isinstance(artifact, RephrasedQuestion):
        new.rephrased_question = artifact.text
    elif isinstance(artifact, SchemaSubset):
        new.selected_schema = {t: list(c) for t, c in artifact.tables.items()}
    elif isinstance(artifact, ValueNotes):
        new.value_notes = artifact.text
    elif isinstance(artifact, FunctionNotes):
        new.function_notes = artifact.text
    elif isinstance(artifact, GeneratedSql):
        new.sql = artifact.sql
    elif isinstance(artifact, RevisedSql):
        new.sql = artifact.sql
        new.revision_count += artifact.rounds_used
        new.revision_context = (artifact.from_sql, artifact.from_result)
    elif isinstance(artifact, Terminated):
        pass
    else:
        raise ContractViolation(f"unknown artifact type {type(artifact).__name__}")
    new.reasoning_log.append((action, raw))
    return new
