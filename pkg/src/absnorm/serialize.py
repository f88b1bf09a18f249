"""Canonical JSON persistence: rationals as "p/q" strings, stable bytes.

State files must round-trip bit-exactly and two runs with identical inputs
must serialize to identical bytes, so everything funnels through
:func:`canonical_dumps` (sorted keys, fixed separators, trailing newline)
and rationals are always rendered as exact "p/q" decimal strings.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

STATE_VERSION = 1


def frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s: str) -> Fraction:
    num, _, den = s.partition("/")
    if not den:
        return Fraction(int(num))
    return Fraction(int(num), int(den))


def canonical_dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, compact separators, newline)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(canonical_dumps(obj), encoding="utf-8")


def read_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
