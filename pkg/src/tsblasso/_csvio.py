"""Versioned CSV reading/writing.

Every file this package writes starts with a schema comment line

    # schema: <name>-v1

followed by a regular header row.  Floats are rendered with 17 significant
digits so that re-reading reproduces them bit-exactly and re-running a
seeded experiment reproduces files byte-for-byte.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .errors import SchemaError

SCHEMA_PREFIX = "# schema: "


def fmt(value) -> str:
    """Render a value for CSV: floats with 17 significant digits."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(path: str | Path, schema: str, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    buf.write(f"{SCHEMA_PREFIX}{schema}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    path.write_text(buf.getvalue())
    return path


def read_csv(path: str | Path, expect_schema: str | None = None):
    """Return (schema, header, rows-as-string-lists)."""
    path = Path(path)
    with path.open() as fh:
        first = fh.readline().rstrip("\n")
        if not first.startswith(SCHEMA_PREFIX):
            raise SchemaError(f"{path}: missing schema line")
        schema = first[len(SCHEMA_PREFIX) :]
        if expect_schema is not None and schema != expect_schema:
            raise SchemaError(f"{path}: expected schema {expect_schema!r}, found {schema!r}")
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: missing header row") from None
        rows = [row for row in reader if row]
    return schema, header, rows


def require_columns(path, header: list[str], needed: list[str]) -> None:
    missing = [c for c in needed if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
