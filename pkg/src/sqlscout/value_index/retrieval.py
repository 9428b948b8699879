"""Online value retrieval: LSH candidates filtered by edit and semantic similarity.

For each keyword the LSH buckets supply candidate values; candidates then
pass through two gates. Under "and" the edit gate runs first and only its
survivors are embedded; under "or" every candidate is embedded and passing
either gate suffices. Results are deduplicated, sorted by semantic then edit
similarity, and capped per column.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..core.types import SearchConfig
from ..llm_client import Embedder
from . import kernels
from .index import ValueIndex, ValueRecord
from .minhash import signature

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RetrievedValue:
    record: ValueRecord
    edit_sim: float
    semantic_sim: float


def edit_similarity(a: str, b: str) -> float:
    """1 - normalized Levenshtein distance; case-insensitive; 1.0 for two empties."""
    a, b = a.lower(), b.lower()
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    dist = kernels.levenshtein_u32(_codepoints(a), _codepoints(b))
    return 1.0 - dist / longest


def _codepoints(text: str) -> np.ndarray:
    return np.frombuffer(text.encode("utf-32-le"), dtype=np.uint32)


def retrieve_values(
    index: ValueIndex,
    keywords: list[str],
    embedder: Embedder | None,
    cfg: SearchConfig,
) -> list[RetrievedValue]:
    """Values from the index that plausibly ground the keywords.

    Output is deterministic: semantic similarity descending, edit similarity
    descending, then (table, column, value), capped at cfg.top_m_per_column
    rows per column. If the embedder fails (or is None), filtering degrades
    to the edit gate alone with semantic_sim reported as 0.
    """
    best: dict[ValueRecord, tuple[float, float]] = {}  # record -> (sem, edit)
    for keyword in keywords:
        kw = keyword.strip()
        if not kw:
            continue
        sig = signature(kw.lower(), index.salts, index.params.shingle_size)
        candidates = [index.records[rid] for rid in index.candidate_ids(sig)]
        if not candidates:
            continue
        edits = [edit_similarity(kw, rec.value) for rec in candidates]
        if cfg.retrieval_mode == "and":
            gated = [
                (rec, ed) for rec, ed in zip(candidates, edits) if ed >= cfg.eps_edit
            ]
            if not gated:
                continue
            sems = _semantic_sims(embedder, kw, [rec.value for rec, _ in gated])
            if sems is None:
                kept = [(rec, ed, 0.0) for rec, ed in gated]
            else:
                kept = [
                    (rec, ed, sem)
                    for (rec, ed), sem in zip(gated, sems)
                    if sem >= cfg.eps_semantic
                ]
        else:
            sems = _semantic_sims(embedder, kw, [rec.value for rec in candidates])
            if sems is None:
                kept = [
                    (rec, ed, 0.0)
                    for rec, ed in zip(candidates, edits)
                    if ed >= cfg.eps_edit
                ]
            else:
                kept = [
                    (rec, ed, sem)
                    for rec, ed, sem in zip(candidates, edits, sems)
                    if ed >= cfg.eps_edit or sem >= cfg.eps_semantic
                ]
        for rec, ed, sem in kept:
            prev = best.get(rec)
            if prev is None or (sem, ed) > prev:
                best[rec] = (sem, ed)

    ordered = sorted(
        best.items(),
        key=lambda item: (
            -item[1][0],
            -item[1][1],
            item[0].table,
            item[0].column,
            item[0].value,
        ),
    )
    out: list[RetrievedValue] = []
    per_column: dict[tuple[str, str], int] = {}
    for rec, (sem, ed) in ordered:
        key = (rec.table, rec.column)
        if per_column.get(key, 0) >= cfg.top_m_per_column:
            continue
        per_column[key] = per_column.get(key, 0) + 1
        out.append(RetrievedValue(record=rec, edit_sim=ed, semantic_sim=sem))
    return out


def _semantic_sims(
    embedder: Embedder | None, keyword: str, values: list[str]
) -> list[float] | None:
    """Cosine similarity of the keyword against each value; None means unavailable."""
    if embedder is None:
        return None
    try:
        vectors = embedder.embed([keyword] + values)
    except Exception as exc:
        log.warning("embedder failed (%s); falling back to edit-only filtering", exc)
        return None
    kw_vec = vectors[0]
    return [float(np.dot(kw_vec, v)) for v in vectors[1:]]


def as_retrieved_map(results: list[RetrievedValue]) -> dict[tuple[str, str], list[str]]:
    """Regroup results for the schema renderer: (table, column) -> values in rank order."""
    grouped: dict[tuple[str, str], list[str]] = {}
    for item in results:
        grouped.setdefault((item.record.table, item.record.column), []).append(
            item.record.value
        )
    return grouped
