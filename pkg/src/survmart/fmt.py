"""Output formatting: exact rationals plus a 12-significant-digit decimal."""

from __future__ import annotations

import json
import math
from fractions import Fraction

__all__ = ["rational", "cell", "dumps", "tsv"]


def rational(v) -> dict:
    """``{"exact": "num/den", "decimal": "..."}``; infinity becomes ``"inf"`` in both."""
    if isinstance(v, float) and math.isinf(v):
        return {"exact": "inf", "decimal": "inf"}
    v = Fraction(v)
    return {"exact": f"{v.numerator}/{v.denominator}", "decimal": f"{float(v):.12g}"}


def cell(v) -> str:
    """TSV rendering of a rational, e.g. ``1/4 (0.25)``."""
    if isinstance(v, bool) or v is None:
        return str(v).lower()
    if isinstance(v, float):
        return "inf" if math.isinf(v) else f"{v:.12g}"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        r = rational(v)
        return f"{r['exact']} ({r['decimal']})"
    return str(v)


def _default(o):
    if isinstance(o, Fraction):
        return rational(o)
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    if hasattr(o, "x") and hasattr(o, "delta"):
        return {"x": str(o.x), "delta": o.delta}
    raise TypeError(f"cannot encode {type(o).__name__}")


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False, default=_default) + "\n"


def tsv(header: list[str], rows: list[list]) -> str:
    lines = ["\t".join(header)]
    lines += ["\t".join(cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"
