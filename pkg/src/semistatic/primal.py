"""The super-hedging LP over semi-static strategies.

For every exercise time ``t`` the hedger runs the pre-exercise holdings
``H`` up to ``t`` and then a separate continuation ``H_post[t]``; one
inequality per (t, leaf) asks the resulting wealth, plus the static option
position, to cover ``Phi_t`` at that path's time-``t`` node.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .exact_lp import INFEASIBLE, OPTIMAL, UNBOUNDED, LPSolution, RationalLP, solve, verify_certificate
from .market_tree import Instance
from .rational import fmt, fmt_vec

ZERO = Fraction(0)


class UnboundedHedgeError(RuntimeError):
    """The hedging LP is unbounded below, which only happens under arbitrage."""


@dataclass
class SemiStaticStrategy:
    x: Fraction
    h: tuple[Fraction, ...]
    H: dict[str, tuple[Fraction, ...]]
    H_post: dict[int, dict[str, tuple[Fraction, ...]]] = field(default_factory=dict)

    def holding(self, t: int, v: str, time_of_v: int) -> tuple[Fraction, ...]:
        """Holding at node ``v`` when the option was exercised at time ``t``."""
        return self.H_post[t][v] if time_of_v >= t else self.H[v]

    def to_dict(self) -> dict:
        return {
            "x": fmt(self.x),
            "h": fmt_vec(self.h),
            "H": {v: fmt_vec(vec) for v, vec in self.H.items()},
            "H_post": {str(t): {v: fmt_vec(vec) for v, vec in per.items()}
                       for t, per in self.H_post.items()},
        }

    @classmethod
    def zero(cls, inst: Instance, x: Fraction = ZERO) -> "SemiStaticStrategy":
        z = (ZERO,) * inst.stock_dim
        H = {v: z for v in inst.internal}
        post = {t: {v: z for v in inst.internal if inst.by_id[v].time >= t}
                for t in range(inst.horizon + 1)}
        return cls(Fraction(x), (ZERO,) * inst.option_count, H, post)


@dataclass
class PrimalLayout:
    """Variable indices of the hedging LP."""

    x: int
    h: list[int]
    H: dict[str, list[int]]
    H_post: dict[int, dict[str, list[int]]]


def build_primal_lp(inst: Instance, x_upper: Optional[Fraction] = None) -> tuple[RationalLP, PrimalLayout]:
    """Minimize initial capital subject to covering ``Phi_t`` for every (t, leaf).

    ``x_upper`` caps the capital, which turns the LP into a feasibility test
    for budgets below the price.
    """
    lp = RationalLP("min", "superhedge")
    d = inst.stock_dim
    x = lp.add_variable("x", lower=None, upper=x_upper)
    h = [lp.add_variable(f"h[{k}]", lower=None) for k in range(inst.option_count)]
    H = {v: [lp.add_variable(f"H[{v}][{k}]", lower=None) for k in range(d)] for v in inst.internal}
    H_post: dict[int, dict[str, list[int]]] = {}
    for t in range(inst.horizon + 1):
        H_post[t] = {v: [lp.add_variable(f"Hpost[{t}][{v}][{k}]", lower=None) for k in range(d)]
                     for v in inst.internal if inst.by_id[v].time >= t}
    for t in range(inst.horizon + 1):
        for leaf in inst.leaves:
            path = inst.paths[leaf]
            row: dict[int, Fraction] = {x: Fraction(1)}
            for s, (v, c) in enumerate(zip(path, path[1:])):
                idx = H_post[t][v] if s >= t else H[v]
                for k, inc in enumerate(inst.increment(v, c)):
                    if inc:
                        row[idx[k]] = inc
            for k, gk in enumerate(inst.g(leaf)):
                if gk:
                    row[h[k]] = gk
            lp.add_constraint(row, ">=", inst.phi(path[t]), name=f"cover[{t}][{leaf}]")
    lp.set_objective({x: 1})
    return lp, PrimalLayout(x, h, H, H_post)


def _decode(sol: LPSolution, layout: PrimalLayout) -> SemiStaticStrategy:
    xs = sol.x
    return SemiStaticStrategy(
        x=xs[layout.x],
        h=tuple(xs[j] for j in layout.h),
        H={v: tuple(xs[j] for j in idx) for v, idx in layout.H.items()},
        H_post={t: {v: tuple(xs[j] for j in idx) for v, idx in per.items()}
                for t, per in layout.H_post.items()},
    )


@dataclass
class PrimalResult:
    pi: Fraction
    strategy: SemiStaticStrategy
    lp: RationalLP
    solution: LPSolution

    def __iter__(self):
        yield self.pi
        yield self.strategy


def solve_primal(inst: Instance) -> PrimalResult:
    """Super-hedging price and an optimal strategy."""
    lp, layout = build_primal_lp(inst)
    sol = solve(lp)
    if sol.status == UNBOUNDED:
        raise UnboundedHedgeError("hedging LP unbounded below: the market admits arbitrage")
    if sol.status != OPTIMAL:
        raise RuntimeError(f"hedging LP status {sol.status}")
    return PrimalResult(sol.objective, _decode(sol, layout), lp, sol)


def verify_superhedge(inst: Instance, strat: SemiStaticStrategy, budget: Fraction) -> bool:
    """Check every cover inequality pathwise with capital ``budget``."""
    T = inst.horizon
    for t in range(T + 1):
        for leaf in inst.leaves:
            path = inst.paths[leaf]
            wealth = Fraction(budget)
            for s, (v, c) in enumerate(zip(path, path[1:])):
                hold = strat.H_post[t][v] if s >= t else strat.H[v]
                wealth += sum((a * b for a, b in zip(hold, inst.increment(v, c))), ZERO)
            wealth += sum((a * b for a, b in zip(strat.h, inst.g(leaf))), ZERO)
            if wealth < inst.phi(path[t]):
                return False
    return True


def budget_is_infeasible(inst: Instance, budget: Fraction) -> tuple[bool, LPSolution, RationalLP]:
    """Re-solve the hedging LP with capital capped at ``budget``.

    Returns (infeasible?, solution, lp); the solution carries a Farkas
    certificate when infeasible.
    """
    lp, _ = build_primal_lp(inst, x_upper=Fraction(budget))
    sol = solve(lp)
    return sol.status == INFEASIBLE and verify_certificate(lp, sol), sol, lp
