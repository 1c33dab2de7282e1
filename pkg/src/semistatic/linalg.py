"""Exact Gaussian elimination over the rationals.

Used for rank tests, replication checks and vertex enumeration, all of which
must stay independent of the simplex code.
"""
from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence

Matrix = List[List[Fraction]]


def _copy(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(v) for v in row] for row in rows]


def row_echelon(rows: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and the list of pivot columns."""
    m = _copy(rows)
    if not m:
        return m, []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        piv = m[r][c]
        if piv != 1:
            m[r] = [v / piv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(row_echelon(rows)[1])


def solve(a: Sequence[Sequence], b: Sequence) -> Optional[list[Fraction]]:
    """One solution of ``a x = b`` (free variables set to zero), or None."""
    n = len(a[0]) if a else 0
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    red, pivots = row_echelon(aug)
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = red[i][n]
    return x


def in_column_span(columns: Sequence[Sequence], target: Sequence) -> bool:
    """Whether ``target`` is a linear combination of ``columns``."""
    if not columns:
        return all(v == 0 for v in target)
    a = [[col[i] for col in columns] for i in range(len(target))]
    return solve(a, target) is not None


def transpose(rows: Sequence[Sequence]) -> Matrix:
    return [list(col) for col in zip(*rows)] if rows else []


class IncrementalBasis:
    """Column set kept in echelon form so independence tests are cheap.

    ``try_add`` returns a new basis including the column, or None when the
    column is dependent on the ones already present.
    """

    __slots__ = ("rows", "pivots", "members", "_nrows")

    def __init__(self, nrows: int):
        self.rows: list[tuple[int, list[Fraction]]] = []  # (pivot row, reduced column)
        self.pivots: set[int] = set()
        self.members: tuple[int, ...] = ()
        self._nrows = nrows

    def reduce(self, col: Sequence[Fraction]) -> list[Fraction]:
        v = list(col)
        for prow, basis_col in self.rows:
            f = v[prow]
            if f != 0:
                v = [a - f * b for a, b in zip(v, basis_col)]
        return v

    def try_add(self, index: int, col: Sequence[Fraction]) -> Optional["IncrementalBasis"]:
        v = self.reduce(col)
        prow = next((i for i, a in enumerate(v) if a != 0), None)
        if prow is None:
            return None
        piv = v[prow]
        v = [a / piv for a in v]
        new = IncrementalBasis.__new__(IncrementalBasis)
        new._nrows = self._nrows
        new.rows = []
        for r, bc in self.rows:
            f = bc[prow]
            new.rows.append((r, [a - f * b for a, b in zip(bc, v)] if f != 0 else bc))
        new.rows.append((prow, v))
        new.pivots = self.pivots | {prow}
        new.members = self.members + (index,)
        return new
