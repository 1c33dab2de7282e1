"""Rational linear programs, their solutions, and certificate checking."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

Number = Union[int, Fraction]

OPS = {"<=": "<=", "=<": "<=", "le": "<=", ">=": ">=", "=>": ">=", "ge": ">=",
       "=": "=", "==": "=", "eq": "="}

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        raise TypeError("floats are not accepted in exact LPs")
    return Fraction(v)


class RationalLP:
    """A linear program with exact rational data.

    Variables default to ``lower=0, upper=None``; pass ``lower=None`` for a
    free variable. Constraint coefficients are sparse mappings from variable
    index (or name) to value.
    """

    def __init__(self, sense: str = "min", name: str = "lp"):
        if sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")
        self.sense = sense
        self.name = name
        self.var_names: list[str] = []
        self.lower: list[Optional[Fraction]] = []
        self.upper: list[Optional[Fraction]] = []
        self._index: dict[str, int] = {}
        self.objective: dict[int, Fraction] = {}
        self.rows: list[dict[int, Fraction]] = []
        self.ops: list[str] = []
        self.rhs: list[Fraction] = []
        self.row_names: list[str] = []

    # building -----------------------------------------------------------
    def add_variable(self, name: str | None = None, lower: Number | None = 0,
                     upper: Number | None = None) -> int:
        j = len(self.var_names)
        if name is None:
            name = f"x{j}"
        if name in self._index:
            raise ValueError(f"duplicate variable name {name!r}")
        self.var_names.append(name)
        self.lower.append(None if lower is None else _frac(lower))
        self.upper.append(None if upper is None else _frac(upper))
        self._index[name] = j
        return j

    def index(self, var: Union[int, str]) -> int:
        if isinstance(var, str):
            return self._index[var]
        if not 0 <= var < len(self.var_names):
            raise IndexError(f"variable {var} not declared")
        return var

    def add_constraint(self, coeffs: Mapping[Union[int, str], Number], op: str,
                       rhs: Number, name: str | None = None) -> int:
        try:
            op = OPS[op]
        except KeyError:
            raise ValueError(f"unknown constraint operator {op!r}") from None
        row: dict[int, Fraction] = {}
        for var, a in coeffs.items():
            a = _frac(a)
            if a:
                j = self.index(var)
                row[j] = row.get(j, Fraction(0)) + a
        row = {j: a for j, a in row.items() if a}
        self.rows.append(row)
        self.ops.append(op)
        self.rhs.append(_frac(rhs))
        self.row_names.append(name or f"c{len(self.rows) - 1}")
        return len(self.rows) - 1

    def set_objective(self, coeffs: Mapping[Union[int, str], Number],
                      sense: str | None = None) -> None:
        if sense is not None:
            if sense not in ("min", "max"):
                raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")
            self.sense = sense
        self.objective = {}
        for var, a in coeffs.items():
            a = _frac(a)
            if a:
                j = self.index(var)
                self.objective[j] = self.objective.get(j, Fraction(0)) + a

    def copy(self) -> "RationalLP":
        new = RationalLP(self.sense, self.name)
        new.var_names = list(self.var_names)
        new.lower = list(self.lower)
        new.upper = list(self.upper)
        new._index = dict(self._index)
        new.objective = dict(self.objective)
        new.rows = [dict(r) for r in self.rows]
        new.ops = list(self.ops)
        new.rhs = list(self.rhs)
        new.row_names = list(self.row_names)
        return new

    # queries ------------------------------------------------------------
    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_constraints(self) -> int:
        return len(self.rows)

    def objective_value(self, x: Sequence[Fraction]) -> Fraction:
        return sum((a * x[j] for j, a in self.objective.items()), Fraction(0))

    def row_activity(self, i: int, x: Sequence[Fraction]) -> Fraction:
        return sum((a * x[j] for j, a in self.rows[i].items()), Fraction(0))

    def is_feasible(self, x: Sequence[Fraction]) -> bool:
        if len(x) != self.num_vars:
            return False
        for j, v in enumerate(x):
            if self.lower[j] is not None and v < self.lower[j]:
                return False
            if self.upper[j] is not None and v > self.upper[j]:
                return False
        for i, op in enumerate(self.ops):
            act = self.row_activity(i, x)
            b = self.rhs[i]
            if (op == "<=" and act > b) or (op == ">=" and act < b) or (op == "=" and act != b):
                return False
        return True

    def to_lp_format(self) -> str:
        """Render in CPLEX LP text format (for inspection with external tools)."""
        def term(a: Fraction, j: int) -> str:
            sign = "-" if a < 0 else "+"
            mag = abs(a)
            coef = "" if mag == 1 else f"{float(mag)!r} "
            return f"{sign} {coef}{self.var_names[j]}"

        lines = [f"\\ {self.name} (coefficients rendered as floats)",
                 "Minimize" if self.sense == "min" else "Maximize"]
        obj = " ".join(term(a, j) for j, a in sorted(self.objective.items())) or "0"
        lines.append(f" obj: {obj}")
        lines.append("Subject To")
        for i, row in enumerate(self.rows):
            lhs = " ".join(term(a, j) for j, a in sorted(row.items())) or "0"
            op = "=" if self.ops[i] == "=" else self.ops[i]
            lines.append(f" {self.row_names[i]}: {lhs} {op} {float(self.rhs[i])!r}")
        lines.append("Bounds")
        for j, name in enumerate(self.var_names):
            lo, up = self.lower[j], self.upper[j]
            if lo is None and up is None:
                lines.append(f" {name} free")
            else:
                lo_s = "-inf" if lo is None else repr(float(lo))
                up_s = "+inf" if up is None else repr(float(up))
                lines.append(f" {lo_s} <= {name} <= {up_s}")
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass
class LPSolution:
    """Outcome of :func:`solve`.

    ``duals`` are shadow prices of the constraints in the LP's own sense
    (for a max problem a binding ``<=`` row has a nonnegative dual).
    ``farkas`` is the infeasibility certificate, a row multiplier vector in
    minimization convention; ``ray`` is a primal direction of unboundedness.
    """

    status: str
    x: list[Fraction] = field(default_factory=list)
    duals: list[Fraction] = field(default_factory=list)
    objective: Optional[Fraction] = None
    farkas: Optional[list[Fraction]] = None
    ray: Optional[list[Fraction]] = None
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _reduced_costs(lp: RationalLP, c: Mapping[int, Fraction], y: Sequence[Fraction]) -> list[Fraction]:
    r = [c.get(j, Fraction(0)) for j in range(lp.num_vars)]
    for i, row in enumerate(lp.rows):
        yi = y[i]
        if yi:
            for j, a in row.items():
                r[j] -= yi * a
    return r


def _dual_bound(lp: RationalLP, y: Sequence[Fraction], r: Sequence[Fraction]) -> Optional[Fraction]:
    """Dual objective of the min-form LP, or None if the multipliers are infeasible."""
    for i, op in enumerate(lp.ops):
        if (op == ">=" and y[i] < 0) or (op == "<=" and y[i] > 0):
            return None
    total = sum((lp.rhs[i] * y[i] for i in range(lp.num_constraints)), Fraction(0))
    for j, rj in enumerate(r):
        if rj > 0:
            if lp.lower[j] is None:
                return None
            total += rj * lp.lower[j]
        elif rj < 0:
            if lp.upper[j] is None:
                return None
            total += rj * lp.upper[j]
    return total


def verify_certificate(lp: RationalLP, sol: LPSolution) -> bool:
    """Re-check a solution from scratch using only the LP data.

    Optimal: primal feasibility, dual feasibility and equal objectives.
    Infeasible: the Farkas multipliers prove that no point is feasible.
    Unbounded: a feasible point plus an improving recession direction.
    """
    sign = 1 if lp.sense == "min" else -1
    c_min = {j: sign * a for j, a in lp.objective.items()}
    m = lp.num_constraints
    if sol.status == OPTIMAL:
        if not lp.is_feasible(sol.x) or len(sol.duals) != m:
            return False
        obj = lp.objective_value(sol.x)
        if sol.objective != obj:
            return False
        y = [sign * v for v in sol.duals]
        bound = _dual_bound(lp, y, _reduced_costs(lp, c_min, y))
        return bound is not None and bound == sign * obj
    if sol.status == INFEASIBLE:
        if sol.farkas is None or len(sol.farkas) != m:
            return False
        y = list(sol.farkas)
        bound = _dual_bound(lp, y, _reduced_costs(lp, {}, y))
        return bound is not None and bound > 0
    if sol.status == UNBOUNDED:
        d = sol.ray
        if d is None or len(d) != lp.num_vars or not lp.is_feasible(sol.x):
            return False
        for j, dj in enumerate(d):
            if (lp.lower[j] is not None and dj < 0) or (lp.upper[j] is not None and dj > 0):
                return False
        for i, op in enumerate(lp.ops):
            act = lp.row_activity(i, d)
            if (op == "=" and act != 0) or (op == ">=" and act < 0) or (op == "<=" and act > 0):
                return False
        return sum((a * d[j] for j, a in c_min.items()), Fraction(0)) < 0
    return False
