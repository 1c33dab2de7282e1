"""Brute-force ground truth for small trees.

Nothing here touches the recursive engines it is meant to check: vertices
come from exact basis enumeration, stopping values from enumerating every
deterministic stopping time, and the mixture price from one LP over the
vertex set.

A vertex of the martingale polytope is exactly a measure whose kernel at
every charged node is a vertex of that node's kernel polytope, so the
default ``local`` method enumerates per-node bases and composes them down
the tree. ``global`` enumerates bases in leaf-weight space directly and is
kept for cross-validation on small trees.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional

from . import polytope
from .duals import solve_e1, solve_e2, solve_nature_lp
from .errors import TheoremViolation
from .exact_lp import OPTIMAL, RationalLP, solve
from .market_tree import Instance, dumps_instance
from .primal import solve_primal
from .rational import fmt, fmt_vec
from .stopping import MartingaleMeasure, StoppingRule, evaluate, snell_value

ZERO = Fraction(0)
ONE = Fraction(1)

LEAF_GUARD = 64
GLOBAL_LEAF_GUARD = 16
VERTEX_GUARD = 20_000
STOPPING_GUARD = 200_000


def kernel_vertices(inst: Instance, v: str) -> list[dict[str, Fraction]]:
    kids = inst.children[v]
    A = [[ONE] * len(kids)]
    b = [ONE]
    for k in range(inst.stock_dim):
        A.append([inst.increment(v, c)[k] for c in kids])
        b.append(ZERO)
    return [dict(zip(kids, q)) for q in polytope.vertices(A, b)]


def enumerate_martingale_vertices(inst: Instance, guard: Optional[int] = None,
                                  method: str = "local") -> list[MartingaleMeasure]:
    """All vertices of the martingale polytope, deduplicated."""
    n = len(inst.leaves)
    if method == "global":
        limit = polytope.guard_value(GLOBAL_LEAF_GUARD) if guard is None else guard
        if n > limit:
            raise polytope.GuardExceeded(f"{n} leaves exceeds guard {limit}")
        A = [[ONE] * n] + [list(vec) for _, _, vec in inst.martingale_rows]
        b = [ONE] + [ZERO] * len(inst.martingale_rows)
        return [MartingaleMeasure(inst, q) for q in polytope.vertices(A, b)]
    if method != "local":
        raise ValueError(f"unknown method {method!r}")
    limit = polytope.guard_value(LEAF_GUARD) if guard is None else guard
    if n > limit:
        raise polytope.GuardExceeded(f"{n} leaves exceeds guard {limit}")
    local = {v: kernel_vertices(inst, v) for v in inst.internal}
    count_limit = polytope.guard_value(VERTEX_GUARD)

    def choices(v: str) -> list[dict[str, dict]]:
        """Kernel assignments for the subtree of ``v`` given that ``v`` is charged."""
        if not inst.children[v]:
            return [{}]
        out = []
        for kern in local[v]:
            charged = [c for c in inst.children[v] if kern[c] > 0]
            for combo in product(*(choices(c) for c in charged)):
                assignment = {v: kern}
                for part in combo:
                    assignment.update(part)
                out.append(assignment)
                if len(out) > count_limit:
                    raise polytope.GuardExceeded(f"more than {count_limit} vertices")
        return out

    seen: dict[tuple, MartingaleMeasure] = {}
    for assignment in choices(inst.root):
        q = MartingaleMeasure.from_kernels(inst, assignment)
        seen.setdefault(q.leaf_weights, q)
    return list(seen.values())


def count_stopping_times(inst: Instance, support: Optional[frozenset] = None) -> int:
    def count(v):
        kids = [c for c in inst.children[v] if support is None or c in support]
        if not kids:
            return 1
        total = 1
        for c in kids:
            total *= count(c)
        return 1 + total
    return count(inst.root)


def enumerate_stopping_times(inst: Instance, support: Optional[frozenset] = None,
                             guard: Optional[int] = None) -> list[StoppingRule]:
    """Every deterministic stopping time, as first-hitting rules.

    With ``support`` given only nodes in it get a decision; elsewhere the
    rule stops (those nodes carry no mass).
    """
    limit = polytope.guard_value(STOPPING_GUARD) if guard is None else guard
    total = count_stopping_times(inst, support)
    if total > limit:
        raise polytope.GuardExceeded(f"{total} stopping times exceeds guard {limit}")
    return [StoppingRule.from_stop_nodes(inst, s) for s in _stop_sets(inst, inst.root, support)]


def _stop_sets(inst: Instance, v: str, support) -> list[frozenset]:
    kids = [c for c in inst.children[v] if support is None or c in support]
    if not kids:
        return [frozenset([v])]
    out = [frozenset([v])]
    for combo in product(*(_stop_sets(inst, c, support) for c in kids)):
        out.append(frozenset().union(*combo))
    return out


def stopping_enumeration_value(inst: Instance, q: MartingaleMeasure) -> Fraction:
    """``max_tau E_Q[Phi_tau]`` over all deterministic stopping times on Q's support."""
    rules = enumerate_stopping_times(inst, support=q.support)
    return max(evaluate(inst, q, rule) for rule in rules)


@dataclass
class OracleResult:
    value: Fraction
    vertices: list[MartingaleMeasure]
    vertex_values: list[Fraction]
    weights: list[Fraction] = field(default_factory=list)


def oracle_e2(inst: Instance, guard: Optional[int] = None) -> OracleResult:
    """Best calibrated mixture over polytope vertices (one LP)."""
    verts = enumerate_martingale_vertices(inst, guard)
    values = [stopping_enumeration_value(inst, q) for q in verts]
    lp = RationalLP("max", "vertex_mixture")
    cs = [lp.add_variable(f"c[{j}]") for j in range(len(verts))]
    gammas = [q.expect_g() for q in verts]
    for k in range(inst.option_count):
        lp.add_constraint({cs[j]: gm[k] for j, gm in enumerate(gammas)}, "=", 0)
    lp.add_constraint({j: 1 for j in cs}, "=", 1)
    lp.set_objective({cs[j]: v for j, v in enumerate(values)})
    sol = solve(lp)
    if sol.status != OPTIMAL:
        raise TheoremViolation("no calibrated vertex mixture: NA is violated")
    return OracleResult(sol.objective, verts, values, [sol.x[j] for j in cs])


@dataclass
class CrossCheckReport:
    values: dict[str, Fraction]
    vertex_count: int
    snell_mismatches: list[int]

    @property
    def ok(self) -> bool:
        return len(set(self.values.values())) == 1 and not self.snell_mismatches

    def to_dict(self) -> dict:
        return {**{k: fmt(v) for k, v in self.values.items()},
                "vertex_count": self.vertex_count,
                "snell_mismatches": self.snell_mismatches, "ok": self.ok}


def cross_check(inst: Instance, guard: Optional[int] = None, raise_on_mismatch: bool = True) -> CrossCheckReport:
    """All four price computations against the oracle, plus per-vertex Snell checks."""
    orc = oracle_e2(inst, guard)
    values = {
        "oracle_e2": orc.value,
        "pi_e2": solve_e2(inst).value,
        "pi_e1": solve_e1(inst).value,
        "pi_primal": solve_primal(inst).pi,
        "pi_nature": solve_nature_lp(inst).value,
    }
    bad = [i for i, (q, v) in enumerate(zip(orc.vertices, orc.vertex_values))
           if snell_value(inst, q)[0] != v]
    report = CrossCheckReport(values, len(orc.vertices), bad)
    if not report.ok and raise_on_mismatch:
        detail = {k: fmt(v) for k, v in values.items()}
        detail["bad_vertices"] = [fmt_vec(orc.vertices[i].leaf_weights) for i in bad]
        raise TheoremViolation(f"cross-check mismatch: {detail}", values,
                               dump=dumps_instance(minimize_counterexample(inst)))
    return report


def minimize_counterexample(inst: Instance) -> Instance:
    """Greedily drop options while the four-way mismatch persists."""
    def still_bad(candidate: Instance) -> bool:
        try:
            r = cross_check(candidate, raise_on_mismatch=False)
        except Exception:
            return False
        return not r.ok

    current = inst
    changed = True
    while changed and current.option_count:
        changed = False
        for k in range(current.option_count):
            keep = [j for j in range(current.option_count) if j != k]
            cand = current.with_options(keep)
            if still_bad(cand):
                current, changed = cand, True
                break
    return current
