"""Column tables on disk: CSV with a ``#`` header block, or JSON."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCHEMA = "blockade-ladder-table/1"
UNITS_NOTE = "all rates in units of gamma_rd; times in units of 1/gamma_rd"


@dataclass
class Table:
    columns: list
    data: dict
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.data = {c: np.asarray(self.data[c], dtype=float) for c in self.columns}
        lengths = {len(v) for v in self.data.values()}
        if len(lengths) > 1:
            raise ValueError("table columns have different lengths")

    def __len__(self):
        return len(self.data[self.columns[0]]) if self.columns else 0

    def __getitem__(self, name):
        return self.data[name]


def _fmt(x: float) -> str:
    return repr(float(x))


def to_csv(table: Table) -> str:
    buf = io.StringIO()
    meta = {"schema": SCHEMA, "units": UNITS_NOTE, **table.meta}
    for k, v in meta.items():
        buf.write(f"# {k}: {json.dumps(v) if not isinstance(v, str) else v}\n")
    buf.write(",".join(table.columns) + "\n")
    cols = [table.data[c] for c in table.columns]
    for row in zip(*cols):
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    return buf.getvalue()


def to_json(table: Table) -> str:
    doc = {
        "schema": SCHEMA,
        "units": UNITS_NOTE,
        "meta": table.meta,
        "columns": table.columns,
        "data": {c: [float(x) for x in table.data[c]] for c in table.columns},
    }
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def dumps(table: Table, fmt="csv") -> str:
    if fmt == "csv":
        return to_csv(table)
    if fmt == "json":
        return to_json(table)
    raise ValueError(f"unknown table format {fmt!r}")


def write(table: Table, path, fmt="csv"):
    Path(path).write_text(dumps(table, fmt))


def _parse_meta_value(v: str):
    try:
        return json.loads(v)
    except json.JSONDecodeError:
        return v


def loads_csv(text: str) -> Table:
    meta = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        key, _, value = lines[i][1:].strip().partition(":")
        meta[key.strip()] = _parse_meta_value(value.strip())
        i += 1
    if i >= len(lines):
        raise ValueError("table has no column header")
    columns = lines[i].strip().split(",")
    rows = [ln.split(",") for ln in lines[i + 1 :] if ln.strip()]
    arr = np.array(rows, dtype=float).reshape(len(rows), len(columns))
    if meta.get("schema") != SCHEMA:
        raise ValueError(f"unsupported table schema {meta.get('schema')!r}")
    meta.pop("schema")
    meta.pop("units", None)
    return Table(columns, {c: arr[:, k] for k, c in enumerate(columns)}, meta)


def loads_json(text: str) -> Table:
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"unsupported table schema {doc.get('schema')!r}")
    return Table(list(doc["columns"]), doc["data"], doc.get("meta", {}))


def load(path) -> Table:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return loads_json(text)
    return loads_csv(text)
