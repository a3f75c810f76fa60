"""Helpers around exact rational arithmetic.

All game state is held in ``fractions.Fraction``, which already provides
reduced, arbitrary-precision rationals with exact arithmetic.  This module
adds the "p/q" string encoding used by every file format in the package,
plus a couple of small conveniences.
"""

from __future__ import annotations

import math
from fractions import Fraction

Q = Fraction  # short constructor alias used throughout the package


def parse_ratio(text: str | int) -> Fraction:
    """Parse "p/q" or "p" (also accepts plain ints)."""
    if isinstance(text, int):
        return Fraction(text)
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def format_ratio(value: Fraction) -> str:
    """Encode a rational as "p/q" in lowest terms ("p" when q == 1)."""
    return str(Fraction(value))


def common_denominator(values) -> int:
    """LCM of the (reduced) denominators of an iterable of rationals."""
    den = 1
    for v in values:
        den = math.lcm(den, Fraction(v).denominator)
    return den


def floor_div(value: Fraction) -> int:
    """Exact floor of a rational."""
    return value.numerator // value.denominator
