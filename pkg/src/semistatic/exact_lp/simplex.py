"""Two-phase dense-tableau simplex with Bland's rule, in exact arithmetic.

Every row of the standard form owns an identity column (a slack with
coefficient +1 or an artificial). Those columns stay in the tableau for the
whole run, so their reduced costs give the row duals at the end of either
phase without a separate linear solve.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Optional

from .backend import Backend, get_backend
from .model import INFEASIBLE, OPTIMAL, UNBOUNDED, LPSolution, RationalLP


class _StandardForm:
    """``min c'x'  s.t.  A'x' = b' >= 0, x' >= 0`` equivalent of an LP."""

    def __init__(self, lp: RationalLP):
        zero = Fraction(0)
        self.lp = lp
        n = lp.num_vars
        self.offset = [zero] * n
        self.cols: list[tuple[int, int]] = []  # (original var, +-1)
        ub_rows: list[tuple[int, Fraction]] = []
        for j in range(n):
            lo, up = lp.lower[j], lp.upper[j]
            if lo is not None:
                self.offset[j] = lo
                self.cols.append((j, 1))
                if up is not None:
                    ub_rows.append((len(self.cols) - 1, up - lo))
            elif up is not None:
                self.offset[j] = up
                self.cols.append((j, -1))
            else:
                self.cols.append((j, 1))
                self.cols.append((j, -1))
        var_cols: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for k, (j, s) in enumerate(self.cols):
            var_cols[j].append((k, s))

        rows: list[dict[int, Fraction]] = []
        ops: list[str] = []
        rhs: list[Fraction] = []
        for i, row in enumerate(lp.rows):
            srow: dict[int, Fraction] = {}
            b = lp.rhs[i]
            for j, a in row.items():
                b -= a * self.offset[j]
                for k, s in var_cols[j]:
                    srow[k] = a * s
            rows.append(srow)
            ops.append(lp.ops[i])
            rhs.append(b)
        for k, bound in ub_rows:
            rows.append({k: Fraction(1)})
            ops.append("<=")
            rhs.append(bound)
        self.rows, self.ops, self.rhs = rows, ops, rhs
        self.n_struct = len(self.cols)
        self.var_cols = var_cols

        sign = 1 if lp.sense == "min" else -1
        self.cost = [zero] * self.n_struct
        for j, a in lp.objective.items():
            for k, s in var_cols[j]:
                self.cost[k] = sign * a * s

    def to_original(self, xs: list[Fraction]) -> list[Fraction]:
        x = list(self.offset)
        for k, (j, s) in enumerate(self.cols):
            if xs[k]:
                x[j] += s * xs[k]
        return x

    def direction_to_original(self, ds: list[Fraction]) -> list[Fraction]:
        d = [Fraction(0)] * self.lp.num_vars
        for k, (j, s) in enumerate(self.cols):
            if ds[k]:
                d[j] += s * ds[k]
        return d


_observers: list[Callable[[RationalLP, LPSolution], None]] = []


def add_observer(fn: Callable[[RationalLP, LPSolution], None]) -> None:
    """Call ``fn(lp, solution)`` after every solve (auditing, certificate checks)."""
    _observers.append(fn)


def remove_observer(fn) -> None:
    _observers.remove(fn)


def solve(lp: RationalLP, backend: Optional[str] = None,
          max_pivots: int = 1_000_000) -> LPSolution:
    """Solve ``lp`` exactly. Outcomes are reported through ``status``."""
    sol = _solve(lp, backend, max_pivots)
    for fn in tuple(_observers):
        fn(lp, sol)
    return sol


def _solve(lp: RationalLP, backend: Optional[str], max_pivots: int) -> LPSolution:
    be: Backend = get_backend(backend)
    num = be.number
    kern = be.kernels
    sf = _StandardForm(lp)
    m = len(sf.rows)
    ns = sf.n_struct

    slack_of: list[Optional[int]] = []
    n_slack = 0
    for op in sf.ops:
        if op == "=":
            slack_of.append(None)
        else:
            slack_of.append(ns + n_slack)
            n_slack += 1
    row_sign = [1 if b >= 0 else -1 for b in sf.rhs]

    idcol: list[int] = [0] * m
    is_art = [False] * m
    n_art = 0
    limit = ns + n_slack
    for i, op in enumerate(sf.ops):
        slack_coef = {"<=": 1, ">=": -1, "=": 0}[op] * row_sign[i]
        if slack_coef == 1:
            idcol[i] = slack_of[i]
        else:
            idcol[i] = limit + n_art
            is_art[i] = True
            n_art += 1
    width = limit + n_art

    zero = num(Fraction(0))
    one = num(Fraction(1))
    rows = []
    for i in range(m):
        s = row_sign[i]
        row = [zero] * (width + 1)
        for k, a in sf.rows[i].items():
            row[k] = num(s * a)
        if slack_of[i] is not None:
            row[slack_of[i]] = num(s * (1 if sf.ops[i] == "<=" else -1))
        if is_art[i]:
            row[idcol[i]] = one
        row[width] = num(s * sf.rhs[i])
        rows.append(row)
    basis = list(idcol)

    obj2 = [zero] * (width + 1)
    for k in range(ns):
        if sf.cost[k]:
            obj2[k] = num(sf.cost[k])
    obj1 = [zero] * (width + 1)
    for i in range(m):
        if is_art[i]:
            obj1[idcol[i]] = one
    for i in range(m):
        if is_art[i]:
            ri = rows[i]
            obj1 = [a - b for a, b in zip(obj1, ri)]

    npiv = 0
    # phase I
    if n_art:
        while True:
            j = kern.entering(obj1, limit)
            if j < 0:
                break
            i = kern.leaving(rows, j, basis)
            if i < 0:  # phase I objective is bounded below by 0
                raise AssertionError("phase I unbounded")
            kern.pivot(rows, [obj1, obj2], i, j)
            basis[i] = j
            npiv += 1
            if npiv > max_pivots:
                raise RuntimeError("pivot limit exceeded")
        if obj1[width] != 0:
            y = [be.to_fraction((one if is_art[i] else zero) - obj1[idcol[i]]) for i in range(m)]
            farkas = [row_sign[i] * y[i] for i in range(lp.num_constraints)]
            return LPSolution(INFEASIBLE, farkas=farkas, pivots=npiv)
        # drive remaining artificials out where possible; rows that cannot be
        # pivoted are redundant and stay inert at level zero
        for i in range(m):
            if basis[i] >= limit:
                ri = rows[i]
                j = next((k for k in range(limit) if ri[k]), -1)
                if j >= 0:
                    kern.pivot(rows, [obj2], i, j)
                    basis[i] = j
                    npiv += 1

    # phase II
    while True:
        j = kern.entering(obj2, limit)
        if j < 0:
            break
        i = kern.leaving(rows, j, basis)
        if i < 0:
            xs = [Fraction(0)] * width
            ds = [Fraction(0)] * width
            ds[j] = Fraction(1)
            for r in range(m):
                xs[basis[r]] = be.to_fraction(rows[r][width])
                ds[basis[r]] = -be.to_fraction(rows[r][j])
            x = sf.to_original(xs[:ns])
            d = sf.direction_to_original(ds[:ns])
            return LPSolution(UNBOUNDED, x=x, ray=d, pivots=npiv)
        kern.pivot(rows, [obj2], i, j)
        basis[i] = j
        npiv += 1
        if npiv > max_pivots:
            raise RuntimeError("pivot limit exceeded")

    xs = [Fraction(0)] * width
    for r in range(m):
        xs[basis[r]] = be.to_fraction(rows[r][width])
    x = sf.to_original(xs[:ns])
    y = [-be.to_fraction(obj2[idcol[i]]) for i in range(m)]
    sense_sign = 1 if lp.sense == "min" else -1
    duals = [sense_sign * row_sign[i] * y[i] for i in range(lp.num_constraints)]
    return LPSolution(OPTIMAL, x=x, duals=duals, objective=lp.objective_value(x), pivots=npiv)
