"""Offline value index: MinHash signatures plus LSH banding over text columns.

Built once per database. Each record's signature is split into `bands` runs
of `rows_per_band` values; records sharing any band hash land in the same
bucket, so lookup gathers near-duplicates without scanning every value.
"""

from __future__ import annotations

import json
import sqlite3
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core.catalog import DatabaseCatalog
from ..errors import ContractViolation, IngestionError
from .minhash import MinHashParams, permutation_salts, signature

DISTINCT_VALUE_CAP = 10_000
_FORMAT = "sqlscout-value-index"
_VERSION = 1


@dataclass(frozen=True)
class ValueRecord:
    table: str
    column: str
    value: str

    def __post_init__(self):
        if not self.value:
            raise ContractViolation("value must be non-empty")


@dataclass
class ValueIndex:
    db_id: str
    params: MinHashParams
    records: list[ValueRecord]
    signatures: np.ndarray  # (n, k) uint64, rows parallel to records
    buckets: dict[tuple[int, bytes], list[int]] = field(default_factory=dict)
    salts: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.salts is None:
            self.salts = permutation_salts(self.params)
        if not self.buckets and len(self.records):
            self._fill_buckets()

    def _fill_buckets(self) -> None:
        for rid in range(len(self.records)):
            for key in band_keys(self.signatures[rid], self.params):
                self.buckets.setdefault(key, []).append(rid)

    def candidate_ids(self, sig: np.ndarray) -> list[int]:
        """Record ids sharing at least one LSH band with the signature."""
        seen: set[int] = set()
        for key in band_keys(sig, self.params):
            seen.update(self.buckets.get(key, ()))
        return sorted(seen)


def band_keys(sig: np.ndarray, params: MinHashParams) -> list[tuple[int, bytes]]:
    rows = params.rows_per_band
    return [
        (b, sig[b * rows : (b + 1) * rows].tobytes())
        for b in range(params.bands)
    ]


def build_value_index(
    catalog: DatabaseCatalog,
    params: MinHashParams | None = None,
    value_cap: int = DISTINCT_VALUE_CAP,
) -> ValueIndex:
    """Scan distinct values of every TEXT column and index their signatures.

    Values are lowercased for hashing but stored verbatim. Scan order (and
    hence the serialized file) is deterministic: catalog table/column order,
    values ascending.
    """
    params = params or MinHashParams()
    salts = permutation_salts(params)
    path = Path(catalog.db_path)
    if not path.exists():
        raise IngestionError(f"database file not found: {path}")
    conn = sqlite3.connect(f"file:{path}?mode=ro", uri=True)
    conn.text_factory = lambda b: b.decode("utf-8", errors="replace")
    records: list[ValueRecord] = []
    sigs: list[np.ndarray] = []
    try:
        for table, column in catalog.text_columns():
            try:
                rows = conn.execute(
                    f'SELECT DISTINCT "{column}" FROM "{table}" '
                    f'WHERE "{column}" IS NOT NULL ORDER BY 1 LIMIT ?',
                    (value_cap,),
                ).fetchall()
            except sqlite3.Error as exc:
                raise IngestionError(
                    f"cannot scan {table}.{column}: {exc}"
                ) from exc
            for (raw,) in rows:
                value = str(raw)
                if not value:
                    continue
                records.append(ValueRecord(table=table, column=column, value=value))
                sigs.append(signature(value.lower(), salts, params.shingle_size))
    finally:
        conn.close()
    signatures = (
        np.stack(sigs) if sigs
        else np.empty((0, params.num_permutations), dtype=np.uint64)
    )
    return ValueIndex(
        db_id=catalog.db_id,
        params=params,
        records=records,
        signatures=signatures,
        salts=salts,
    )


def save_index(index: ValueIndex, path: str | Path) -> None:
    """Write the index as line-delimited JSON: one header line, one line per record."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "format": _FORMAT,
        "version": _VERSION,
        "db_id": index.db_id,
        "num_permutations": index.params.num_permutations,
        "bands": index.params.bands,
        "rows_per_band": index.params.rows_per_band,
        "shingle_size": index.params.shingle_size,
        "seed": index.params.seed,
        "n_records": len(index.records),
    }
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
        for rid, rec in enumerate(index.records):
            line = {
                "c": rec.column,
                "s": [int(x) for x in index.signatures[rid]],
                "t": rec.table,
                "v": rec.value,
            }
            fh.write(json.dumps(line, sort_keys=True, separators=(",", ":"),
                                ensure_ascii=False) + "\n")
    tmp.replace(path)


def load_index(path: str | Path) -> ValueIndex:
    """Read an index file; LSH buckets are rebuilt in memory."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("format") != _FORMAT:
            raise IngestionError(f"not a value-index file: {path}")
        if header.get("version") != _VERSION:
            raise IngestionError(f"unsupported index version in {path}")
        params = MinHashParams(
            num_permutations=header["num_permutations"],
            bands=header["bands"],
            rows_per_band=header["rows_per_band"],
            shingle_size=header["shingle_size"],
            seed=header["seed"],
        )
        records: list[ValueRecord] = []
        sigs: list[list[int]] = []
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            records.append(ValueRecord(table=obj["t"], column=obj["c"], value=obj["v"]))
            sigs.append(obj["s"])
    if len(records) != header.get("n_records"):
        raise IngestionError(f"truncated index file: {path}")
    signatures = (
        np.asarray(sigs, dtype=np.uint64) if sigs
        else np.empty((0, params.num_permutations), dtype=np.uint64)
    )
    return ValueIndex(
        db_id=header.get("db_id", ""),
        params=params,
        records=records,
        signatures=signatures,
        salts=permutation_salts(params),
    )
