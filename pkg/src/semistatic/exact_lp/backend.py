"""Kernel selection.

The compiled kernels (Cython over gmpy2 ``mpq``) are used when both the
extension and gmpy2 import; otherwise the pure-Python kernels over
``fractions.Fraction`` are used. ``SEMISTATIC_PURE=1`` forces the fallback.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from types import ModuleType
from typing import Callable

from . import _kernels_py


@dataclass(frozen=True)
class Backend:
    name: str
    kernels: ModuleType
    number: Callable  # Fraction -> backend number
    to_fraction: Callable  # backend number -> Fraction


def _mpq_to_fraction(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


PYTHON = Backend("python", _kernels_py, Fraction, Fraction)

_compiled = None
try:
    import gmpy2

    from . import _kernels as _compiled_kernels

    def _to_mpq(v, _mpq=gmpy2.mpq):
        if isinstance(v, Fraction):
            return _mpq(v.numerator, v.denominator)
        return _mpq(v)

    _compiled = Backend("compiled", _compiled_kernels, _to_mpq, _mpq_to_fraction)
except ImportError:  # extension not built or gmpy2 missing
    _compiled = None

COMPILED = _compiled

BACKENDS = {"python": PYTHON}
if COMPILED is not None:
    BACKENDS["compiled"] = COMPILED


def default_backend() -> Backend:
    if os.environ.get("SEMISTATIC_PURE") or COMPILED is None:
        return PYTHON
    return COMPILED


def get_backend(name: str | None = None) -> Backend:
    if name is None:
        return default_backend()
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None
