"""Parsing and rendering of exact rationals as ``"p/q"`` strings."""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or an int. Floats are rejected."""
    if isinstance(value, bool) or isinstance(value, float):
        raise ValueError(f"expected an exact rational, got {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"malformed rational {value!r}") from None
    raise ValueError(f"expected an exact rational, got {value!r}")


def fmt(q: Fraction) -> str:
    """Canonical lowest-terms rendering: ``"3"``, ``"-1/2"``."""
    return str(Fraction(q))


def fmt_vec(values: Iterable[Fraction]) -> list[str]:
    return [fmt(v) for v in values]


def approx(q: Fraction, digits: int = 12) -> str:
    return f"{float(q):.{digits}g}"
