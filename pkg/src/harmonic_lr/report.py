"""Byte-stable CSV and JSON output.

Floats are written with 17 significant digits, columns in a fixed order,
and rows in the order the producer emitted them.
"""
from __future__ import annotations

import json
import math
import os
from pathlib import Path
from typing import Any, Sequence

from .bounds import BoundReport
from .dynamics import KINDS, KernelSet
from .experiments import LightconeTable


def fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def _json_value(value: Any) -> str:
    if isinstance(value, float) and not math.isfinite(value):
        return json.dumps(fmt(value))
    if isinstance(value, (bool, int, float)):
        return fmt(value)
    return json.dumps(str(value))


def table_of(obj) -> tuple[Sequence[str], list[tuple]]:
    """Columns and row tuples for any reportable object."""
    if isinstance(obj, LightconeTable):
        return obj.COLUMNS, [(r.N, r.t, r.value, r.cone_flag) for r in obj.rows]
    if isinstance(obj, BoundReport):
        return obj.COLUMNS, [
            (r.i, r.j, r.kind, r.theorem, r.t, r.tau, r.d_ij, r.bound, r.exact, r.margin, r.inside_cone)
            for r in obj.rows
        ]
    if isinstance(obj, KernelSet):
        n = obj.n
        rows = [
            (i, j, kind, float(obj.matrix(kind)[i, j]))
            for kind in KINDS for i in range(n) for j in range(n)
        ]
        return ("i", "j", "kind", "value"), rows
    if isinstance(obj, tuple) and len(obj) == 2:
        return obj
    raise TypeError(f"cannot report {type(obj).__name__}")


def render_csv(columns: Sequence[str], rows: list[tuple]) -> str:
    lines = [",".join(columns)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def render_json(columns: Sequence[str], rows: list[tuple], extra: dict | None = None) -> str:
    parts = ['{"columns": ' + json.dumps(list(columns)) + ', "rows": [']
    parts.append(", ".join("[" + ", ".join(_json_value(v) for v in row) + "]" for row in rows))
    parts.append("]")
    for key in sorted(extra or {}):
        parts.append(", " + json.dumps(key) + ": " + _json_value(extra[key]))
    parts.append("}\n")
    return "".join(parts)


def kernels_json(k: KernelSet) -> str:
    """Matrix dump of a kernel set for regression pinning."""
    body = {
        "t": fmt(k.t),
        "method": k.method,
        "certified_error": fmt(float(k.certified_error)),
        **{kind: [[fmt(float(v)) for v in row] for row in k.matrix(kind)] for kind in KINDS},
    }
    return json.dumps(body, sort_keys=True) + "\n"


def emit_report(obj, fmt_name: str, path: str | os.PathLike | None) -> str:
    """Write ``obj`` as ``csv`` or ``json`` to ``path`` (``None`` only renders).

    Returns the rendered text.
    """
    if fmt_name not in ("csv", "json"):
        raise ValueError(f"unknown report format {fmt_name!r}")
    if isinstance(obj, KernelSet) and fmt_name == "json":
        text = kernels_json(obj)
    else:
        columns, rows = table_of(obj)
        text = render_csv(columns, rows) if fmt_name == "csv" else render_json(columns, rows)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
