"""Schema-checked reading of the experiment CSV files.

Every input starts with a ``# schema: <name>-v1`` line followed by a
header row; readers verify both and fail with a column-level message on
mismatch.  An empty body (header only) is valid and renders empty axes.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

SCHEMA_PREFIX = "# schema: "


class SchemaError(ValueError):
    """Input file does not match the expected schema."""


def read_table(path: str | Path, expect_schema: str) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file does not exist")
    with path.open() as fh:
        first = fh.readline().rstrip("\n")
        if not first.startswith(SCHEMA_PREFIX):
            raise SchemaError(f"{path}: missing '# schema:' line")
        schema = first[len(SCHEMA_PREFIX) :]
        if schema != expect_schema:
            raise SchemaError(f"{path}: expected schema {expect_schema!r}, found {schema!r}")
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: missing header row") from None
        rows = [row for row in reader if row]
    return header, rows


def columns(path, header: list[str], rows: list[list[str]], names: list[str]) -> dict:
    """Extract named columns as float arrays (strings for non-numeric)."""
    missing = [c for c in names if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
    out = {}
    for name in names:
        idx = header.index(name)
        raw = [row[idx] for row in rows]
        try:
            out[name] = np.array([float(v) if v != "" else np.nan for v in raw])
        except ValueError:
            out[name] = raw
    return out
