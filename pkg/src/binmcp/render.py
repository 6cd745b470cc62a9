"""Plain tables and their CSV, markdown and JSON renderings.

Numbers are formatted without reference to the locale. Floats get six digits
after the decimal point; non-zero magnitudes below 1e-4 switch to scientific
notation with six mantissa digits so small p-values keep their information.
JSON output carries the raw floats.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

PRECISION = 6
_SCI_BELOW = 1e-4

Cell = Any


def format_number(value: Cell) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if value != 0 and abs(value) < _SCI_BELOW:
            return f"{value:.{PRECISION}e}"
        out = f"{value:.{PRECISION}f}"
        return "0.000000" if out == "-0.000000" else out
    if hasattr(value, "item"):  # numpy scalars
        return format_number(value.item())
    return str(value)


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple[Cell, ...], ...]
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"{self.name}: row width {len(row)} != {len(self.columns)} columns")


def _json_value(value: Cell) -> Any:
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def to_csv(tables: Sequence[Table]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for i, t in enumerate(tables):
        if i:
            buf.write("\n")
        buf.write(f"# {t.name}\n")
        writer.writerow(t.columns)
        for row in t.rows:
            writer.writerow([format_number(v) for v in row])
    return buf.getvalue()


def to_markdown(tables: Sequence[Table]) -> str:
    parts = []
    for t in tables:
        cells = [list(t.columns)] + [[format_number(v) for v in row] for row in t.rows]
        widths = [max(len(r[j]) for r in cells) for j in range(len(t.columns))]

        def line(r: list[str]) -> str:
            return "| " + " | ".join(c.ljust(w) for c, w in zip(r, widths)) + " |"

        body = [line(cells[0]), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
        body += [line(r) for r in cells[1:]]
        notes = [f"{k}: {format_number(v)}" for k, v in t.meta.items()]
        parts.append("\n".join([f"### {t.name}", ""] + body + ([""] + notes if notes else [])))
    return "\n\n".join(parts) + "\n"


def to_json(tables: Sequence[Table], meta: dict[str, Any] | None = None) -> str:
    doc = {
        "meta": meta or {},
        "tables": [{"name": t.name, "meta": t.meta, "columns": list(t.columns),
                    "rows": [[_json_value(v) for v in row] for row in t.rows]} for t in tables],
    }
    return json.dumps(doc, indent=2, sort_keys=False, default=_json_value) + "\n"


def render(tables: Sequence[Table], fmt: str, meta: dict[str, Any] | None = None) -> str:
    if fmt == "csv":
        return to_csv(tables)
    if fmt == "md":
        return to_markdown(tables)
    if fmt == "json":
        return to_json(tables, meta)
    raise ValueError(f"unknown format {fmt!r}")
