"""Database schema model and loaders.

A DatabaseCatalog is the engine's view of one SQLite database: tables,
columns with declared types, primary/foreign keys, optional human-written
column descriptions (read from the per-database description CSVs that
benchmark releases ship), and a few example values per text column.
"""

from __future__ import annotations

import csv
import sqlite3
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import IngestionError

VALUE_EXAMPLE_CAP = 3


@dataclass
class ColumnDef:
    name: str
    type: str
    not_null: bool = False
    primary_key: bool = False
    description: str = ""
    value_examples: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class ForeignKey:
    table: str
    columns: tuple[str, ...]
    ref_table: str
    ref_columns: tuple[str, ...]


@dataclass
class TableDef:
    name: str
    columns: list[ColumnDef]

    def column(self, name: str) -> ColumnDef | None:
        lowered = name.lower()
        for col in self.columns:
            if col.name.lower() == lowered:
                return col
        return None

    @property
    def primary_key(self) -> list[str]:
        return [c.name for c in self.columns if c.primary_key]


@dataclass
class DatabaseCatalog:
    db_id: str
    db_path: str
    tables: list[TableDef]
    foreign_keys: list[ForeignKey]

    def table(self, name: str) -> TableDef | None:
        lowered = name.lower()
        for t in self.tables:
            if t.name.lower() == lowered:
                return t
        return None

    def text_columns(self) -> list[tuple[str, str]]:
        out = []
        for t in self.tables:
            for c in t.columns:
                if "char" in c.type.lower() or "text" in c.type.lower():
                    out.append((t.name, c.name))
        return out


def load_catalog(db_path: str | Path, db_id: str = "",
                 value_examples: bool = True) -> DatabaseCatalog:
    """Read table/column/key structure from a SQLite file."""
    path = Path(db_path)
    if not path.exists():
        raise IngestionError(f"database file not found: {path}")
    db_id = db_id or path.stem
    uri = f"file:{path}?mode=ro"
    try:
        conn = sqlite3.connect(uri, uri=True)
    except sqlite3.Error as exc:
        raise IngestionError(f"cannot open {path}: {exc}") from exc
    try:
        conn.text_factory = lambda b: b.decode("utf-8", errors="replace")
        names = [
            r[0] for r in conn.execute(
                "SELECT name FROM sqlite_master WHERE type='table' "
                "AND name NOT LIKE 'sqlite_%' ORDER BY name"
            )
        ]
        tables: list[TableDef] = []
        fks: list[ForeignKey] = []
        for name in names:
            cols = []
            for _, cname, ctype, not_null, _default, pk in conn.execute(
                f'PRAGMA table_info("{name}")'
            ):
                cols.append(ColumnDef(
                    name=cname,
                    type=ctype or "TEXT",
                    not_null=bool(not_null),
                    primary_key=bool(pk),
                ))
            table = TableDef(name=name, columns=cols)
            if value_examples:
                _attach_value_examples(conn, table)
            tables.append(table)
            # group multi-column foreign keys by their constraint id
            grouped: dict[int, list[tuple[str, str, str]]] = {}
            for fk_id, _seq, ref_table, col, ref_col, *_ in conn.execute(
                f'PRAGMA foreign_key_list("{name}")'
            ):
                if col is None or ref_col is None:
                    continue  # shorthand REFERENCES without explicit columns
                grouped.setdefault(fk_id, []).append((ref_table, col, ref_col))
            for parts in grouped.values():
                ref_table = parts[0][0]
                fks.append(ForeignKey(
                    table=name,
                    columns=tuple(p[1] for p in parts),
                    ref_table=ref_table,
                    ref_columns=tuple(p[2] for p in parts),
                ))
    finally:
        conn.close()
    return DatabaseCatalog(db_id=db_id, db_path=str(path), tables=tables,
                           foreign_keys=fks)


def _attach_value_examples(conn: sqlite3.Connection, table: TableDef) -> None:
    for col in table.columns:
        tl = col.type.lower()
        if "char" not in tl and "text" not in tl:
            continue
        try:
            rows = conn.execute(
                f'SELECT DISTINCT "{col.name}" FROM "{table.name}" '
                f'WHERE "{col.name}" IS NOT NULL LIMIT {VALUE_EXAMPLE_CAP}'
            ).fetchall()
        except sqlite3.Error:
            continue
        col.value_examples = [str(r[0]) for r in rows if str(r[0]).strip()]


def attach_descriptions(catalog: DatabaseCatalog, description_dir: str | Path) -> None:
    """Merge column descriptions from per-table CSVs named `<table>.csv`.

    Expected columns: original_column_name plus one of column_description /
    value_description. Files use inconsistent encodings in the wild, so
    utf-8-sig is tried first and latin-1 is the fallback.
    """
    directory = Path(description_dir)
    if not directory.is_dir():
        return
    for table in catalog.tables:
        csv_path = directory / f"{table.name}.csv"
        if not csv_path.exists():
            continue
        rows = _read_csv(csv_path)
        for row in rows:
            cname = (row.get("original_column_name") or "").strip()
            if not cname:
                continue
            col = table.column(cname)
            if col is None:
                continue
            desc = (row.get("column_description") or "").strip()
            vdesc = (row.get("value_description") or "").strip()
            parts = [p for p in (desc, vdesc) if p]
            if parts:
                col.description = " ".join(" ".join(parts).split())


def _read_csv(path: Path) -> list[dict[str, str]]:
    for encoding in ("utf-8-sig", "latin-1"):
        try:
            with open(path, newline="", encoding=encoding) as fh:
                return list(csv.DictReader(fh))
        except UnicodeDecodeError:
            continue
    raise IngestionError(f"cannot decode {path}")
