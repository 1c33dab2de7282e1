"""Vertex enumeration of ``{q >= 0, A q = b}`` by exhaustive basis search."""
from __future__ import annotations

import os
from fractions import Fraction
from typing import Sequence

from . import linalg

DEFAULT_GUARD = 64


class GuardExceeded(RuntimeError):
    """Enumeration would exceed the configured size guard."""


def guard_value(default: int) -> int:
    """``SEMISTATIC_GUARD`` overrides every size guard when set."""
    env = os.environ.get("SEMISTATIC_GUARD")
    return int(env) if env else default


def vertices(A: Sequence[Sequence], b: Sequence,
             max_bases: int = 2_000_000) -> list[tuple[Fraction, ...]]:
    """All vertices, deduplicated, in the order they are first found.

    Depth-first search over column subsets in index order, keeping only
    linearly independent ones; every independent subset of size rank(A) is
    a basis whose exact solution is kept when nonnegative.
    """
    if not A:
        return []
    n = len(A[0])
    aug, piv = linalg.row_echelon([list(row) + [rhs] for row, rhs in zip(A, b)])
    if n in piv:
        return []  # inconsistent system
    r = len(piv)
    rows = [aug[i][:n] for i in range(r)]
    rhs = [aug[i][n] for i in range(r)]
    cols = [[rows[i][j] for i in range(r)] for j in range(n)]

    found: dict[tuple[Fraction, ...], None] = {}
    visited = 0

    def dfs(start: int, basis: linalg.IncrementalBasis):
        nonlocal visited
        size = len(basis.members)
        if size == r:
            visited += 1
            if visited > max_bases:
                raise GuardExceeded(f"more than {max_bases} bases")
            sub = [[cols[j][i] for j in basis.members] for i in range(r)]
            sol = linalg.solve(sub, rhs)
            if sol is not None and all(v >= 0 for v in sol):
                q = [Fraction(0)] * n
                for j, v in zip(basis.members, sol):
                    q[j] = v
                found.setdefault(tuple(q), None)
            return
        for j in range(start, n - (r - size) + 1):
            nxt = basis.try_add(j, cols[j])
            if nxt is not None:
                dfs(j + 1, nxt)

    if r == 0:
        return [tuple([Fraction(0)] * n)]
    dfs(0, linalg.IncrementalBasis(r))
    return list(found)
