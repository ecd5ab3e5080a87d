"""Byte-stable serialization helpers shared by the CLI writers.

Every float is printed with 17 significant digits, which round-trips
IEEE doubles exactly, so identically configured runs emit identical
bytes and golden files stay comparable with plain diff.
"""

from __future__ import annotations

import json
import math

_MARK = "\x01"


def fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} has no canonical form")
    return format(float(x), ".17g")


def _walk(obj):
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return _MARK + fmt_float(obj) + _MARK
    if isinstance(obj, complex):
        return {"re": _walk(obj.real), "im": _walk(obj.imag)}
    if isinstance(obj, dict):
        return {str(k): _walk(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_walk(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj) -> str:
    """JSON text with canonical float formatting and a trailing newline."""
    text = json.dumps(_walk(obj), indent=2, ensure_ascii=True)
    # ensure_ascii renders the marker as its six-character escape
    return text.replace('"\\u0001', "").replace('\\u0001"', "") + "\n"
