"""Deterministic text formatting for CSV/JSON artifacts.

All floats are rendered with 12 significant digits, '.' decimal separator,
no locale dependence, so repeated runs produce byte-identical files.
"""

from __future__ import annotations

import math


def fmt_float(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{float(x):.12g}"


def fmt_value(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int,)):
        return str(x)
    if isinstance(x, float):
        return fmt_float(x)
    return str(x)


def csv_line(fields) -> str:
    return ",".join(fmt_value(f) for f in fields)


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(csv_line(r) for r in rows)
    return "\n".join(lines) + "\n"
