"""Dual representations of the super-hedging price.

* ``solve_e1``: minimize ``phi(h) = sup_Q sup_tau E_Q[Phi_tau - h g]`` over
  the static position by Kelley's cutting-plane method.
* ``solve_e2``: maximize ``sum_i c_i sup_tau E_{Q_i}[Phi_tau]`` over
  mixtures whose barycenter prices the options at zero, by column
  generation. Its pricing problem is ``phi`` again.
* ``solve_nature_lp``: one occupation-measure LP with separate pre- and
  post-exercise flows, i.e. Nature learns the exercise event.
* ``model_sup_calibrated``: the best single calibrated model, by vertex
  enumeration; it can fall strictly below the other three.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import polytope
from .exact_lp import INFEASIBLE, OPTIMAL, RationalLP, solve
from .market_tree import Instance, positive_calibrated_measure, reduce_redundant_options
from .primal import solve_primal
from .stopping import MartingaleMeasure, joint_sup, snell_value

ZERO = Fraction(0)
ONE = Fraction(1)


class BoxError(RuntimeError):
    """No ball around 0 fits inside the set of option expectations."""


class NoCalibratedModelError(RuntimeError):
    """No (mixture of) martingale measures prices the options at zero."""


class MixtureError(ValueError):
    """Mixture weights or calibration are violated."""


@dataclass(frozen=True)
class MixtureModel:
    components: tuple[tuple[Fraction, MartingaleMeasure], ...]

    @property
    def weights(self) -> tuple[Fraction, ...]:
        return tuple(c for c, _ in self.components)

    @property
    def measures(self) -> tuple[MartingaleMeasure, ...]:
        return tuple(q for _, q in self.components)

    def calibration(self) -> tuple[Fraction, ...]:
        inst = self.components[0][1].instance
        out = [ZERO] * inst.option_count
        for c, q in self.components:
            for k, v in enumerate(q.expect_g()):
                out[k] += c * v
        return tuple(out)

    def problems(self) -> list[str]:
        out = []
        if not self.components:
            return ["empty mixture"]
        if any(c <= 0 for c in self.weights):
            out.append("nonpositive weight")
        if sum(self.weights, ZERO) != 1:
            out.append("weights do not sum to 1")
        if any(v != 0 for v in self.calibration()):
            out.append("mixture does not price the options at zero")
        for i, q in enumerate(self.measures):
            if not q.is_valid():
                out.append(f"component {i} is not a martingale measure")
        return out

    def is_valid(self) -> bool:
        return not self.problems()

    def validate(self) -> None:
        bad = self.problems()
        if bad:
            raise MixtureError("; ".join(bad))

    def barycenter(self) -> MartingaleMeasure:
        inst = self.components[0][1].instance
        w = [ZERO] * len(inst.leaves)
        for c, q in self.components:
            for i, x in enumerate(q.leaf_weights):
                w[i] += c * x
        return MartingaleMeasure(inst, tuple(w))

    def snell_values(self) -> tuple[Fraction, ...]:
        return tuple(snell_value(q.instance, q)[0] for q in self.measures)

    def value(self) -> Fraction:
        return sum((c * v for c, v in zip(self.weights, self.snell_values())), ZERO)

    def on(self, inst: Instance) -> "MixtureModel":
        return MixtureModel(tuple((c, q.on(inst)) for c, q in self.components))


# the box for the static position ----------------------------------------

def _support_lp(inst: Instance, direction: Sequence[Fraction]) -> tuple[Fraction, MartingaleMeasure]:
    """Max of ``direction . E_Q[g]`` over all martingale measures."""
    lp = RationalLP("max", "support")
    q = [lp.add_variable(f"q[{leaf}]") for leaf in inst.leaves]
    lp.add_constraint({j: 1 for j in q}, "=", 1)
    for _, _, vec in inst.martingale_rows:
        lp.add_constraint({q[i]: a for i, a in enumerate(vec) if a}, "=", 0)
    obj = {}
    for i, leaf in enumerate(inst.leaves):
        val = sum((a * b for a, b in zip(direction, inst.g(leaf))), ZERO)
        if val:
            obj[q[i]] = val
    lp.set_objective(obj)
    sol = solve(lp)
    if sol.status != OPTIMAL:
        raise NoCalibratedModelError("martingale polytope is empty")
    return sol.objective, MartingaleMeasure(inst, tuple(sol.x[j] for j in q))


@dataclass
class Box:
    L: Fraction  # 1 + max |Phi|
    r: Fraction  # radius surrogate from coordinate support values
    R: Fraction  # half-width of the search box, 3 L / r
    extremes: list[MartingaleMeasure] = field(default_factory=list)


def compute_box(inst: Instance) -> Box:
    """Box for the static position, from 2e support-function LPs.

    Requires every option to be non-redundant; a zero support value means
    some direction of h is unpenalized by Nature.
    """
    e = inst.option_count
    L = 1 + inst.max_abs_phi
    if e == 0:
        return Box(L, ONE, ZERO)
    r = None
    extremes = []
    for k in range(e):
        for s in (1, -1):
            direction = [ZERO] * e
            direction[k] = Fraction(s)
            val, q = _support_lp(inst, direction)
            extremes.append(q)
            r = val if r is None else min(r, val)
    if r <= 0:
        raise BoxError("0 is not interior to the set of option expectations; "
                       "run reduce_redundant_options first")
    return Box(L, r, 3 * L / r, extremes)


# cutting planes ---------------------------------------------------------

@dataclass
class Cut:
    h: tuple[Fraction, ...]
    value: Fraction
    subgradient: tuple[Fraction, ...]

    def at(self, h: Sequence[Fraction]) -> Fraction:
        return self.value + sum((g * (a - b) for g, a, b in zip(self.subgradient, h, self.h)), ZERO)


@dataclass
class CutModel:
    box: Box
    cuts: list[Cut] = field(default_factory=list)
    lower_bounds: list[Fraction] = field(default_factory=list)
    upper_bounds: list[Fraction] = field(default_factory=list)
    doublings: int = 0

    def consistent(self) -> bool:
        """Every stored cut under-estimates every stored value."""
        return all(c.at(p.h) <= p.value for c in self.cuts for p in self.cuts)


@dataclass
class E1Result:
    value: Fraction
    h_star: tuple[Fraction, ...]
    cut_model: CutModel
    removed: list[int]

    def __iter__(self):
        yield self.value
        yield self.h_star


def _expand(h: Sequence[Fraction], e: int, removed: Sequence[int]) -> tuple[Fraction, ...]:
    it = iter(h)
    return tuple(ZERO if k in removed else next(it) for k in range(e))


def solve_e1(inst: Instance, max_iter: int = 10_000, max_doublings: int = 30) -> E1Result:
    """``inf_h phi(h)`` and a minimizer, by Kelley's method in a box."""
    red, removed = reduce_redundant_options(inst)
    e = red.option_count
    if e == 0:
        jv = joint_sup(red, ())
        model = CutModel(compute_box(red), [Cut((), jv.value, ())], [jv.value], [jv.value])
        return E1Result(jv.value, _expand((), inst.option_count, removed), model, removed)
    box = compute_box(red)
    model = CutModel(box)
    R = box.R
    best: Optional[Cut] = None

    def query(h):
        nonlocal best
        jv = joint_sup(red, h)
        cut = Cut(h, jv.value, jv.subgradient)
        model.cuts.append(cut)
        if best is None or cut.value < best.value:
            best = cut
        model.upper_bounds.append(best.value)

    query((ZERO,) * e)
    for _ in range(max_iter):
        lp = RationalLP("min", "kelley")
        z = lp.add_variable("z", lower=None)
        hv = [lp.add_variable(f"h[{k}]", lower=-R, upper=R) for k in range(e)]
        for c in model.cuts:
            # z >= value + sub . (h - h_c)
            const = c.value - sum((g * a for g, a in zip(c.subgradient, c.h)), ZERO)
            row = {z: ONE}
            for k, g in enumerate(c.subgradient):
                if g:
                    row[hv[k]] = -g
            lp.add_constraint(row, ">=", const)
        lp.set_objective({z: 1})
        sol = solve(lp)
        model.lower_bounds.append(sol.objective)
        if sol.objective == best.value:
            if all(abs(x) < R for x in best.h):
                return E1Result(best.value, _expand(best.h, inst.option_count, removed), model, removed)
            if model.doublings >= max_doublings:
                raise BoxError("minimizer stays on the box boundary")
            R *= 2
            model.doublings += 1
            continue
        query(tuple(sol.x[j] for j in hv))
    raise RuntimeError("cutting planes did not converge")


# column generation ------------------------------------------------------

@dataclass
class Column:
    measure: MartingaleMeasure
    snell: Fraction
    gamma: tuple[Fraction, ...]


@dataclass
class E2Result:
    value: Fraction
    mixture: MixtureModel
    master_values: list[Fraction]
    pool_size: int
    removed: list[int]
    h_dual: tuple[Fraction, ...] = ()

    def __iter__(self):
        yield self.value
        yield self.mixture


def _column(q: MartingaleMeasure) -> Column:
    return Column(q, snell_value(q.instance, q)[0], q.expect_g())


def solve_e2(inst: Instance, max_iter: int = 10_000) -> E2Result:
    """Best calibrated mixture of martingale measures, by column generation."""
    red, removed = reduce_redundant_options(inst)
    e = red.option_count
    pool: list[Column] = []
    seen: set = set()

    def add(q: MartingaleMeasure) -> bool:
        if q.leaf_weights in seen:
            return False
        seen.add(q.leaf_weights)
        pool.append(_column(q))
        return True

    calibrated = positive_calibrated_measure(red)
    if calibrated is not None:
        add(MartingaleMeasure(red, calibrated))
    add(joint_sup(red, (ZERO,) * e).measure)
    if e:
        R = compute_box(red).R
        for signs in itertools.product((1, -1), repeat=e):
            add(joint_sup(red, tuple(s * R for s in signs)).measure)

    master_values: list[Fraction] = []
    for _ in range(max_iter):
        lp = RationalLP("max", "mixture_master")
        cs = [lp.add_variable(f"c[{j}]") for j in range(len(pool))]
        for k in range(e):
            lp.add_constraint({cs[j]: col.gamma[k] for j, col in enumerate(pool)}, "=", 0,
                              name=f"calib[{k}]")
        lp.add_constraint({j: 1 for j in cs}, "=", 1, name="mass")
        lp.set_objective({cs[j]: col.snell for j, col in enumerate(pool)})
        sol = solve(lp)
        if sol.status == INFEASIBLE:
            raise NoCalibratedModelError("no calibrated mixture within the seed pool")
        master_values.append(sol.objective)
        h = tuple(sol.duals[:e])
        eta = sol.duals[e]
        jv = joint_sup(red, h)
        if jv.value > eta:
            if not add(jv.measure):
                raise RuntimeError("pricing returned a column already in the pool")
            continue
        comps = tuple((sol.x[j], pool[j].measure.on(inst)) for j in range(len(pool)) if sol.x[j] > 0)
        mix = MixtureModel(comps)
        return E2Result(sol.objective, mix, master_values, len(pool), removed, h)
    raise RuntimeError("column generation did not converge")


# occupation-measure LP --------------------------------------------------

@dataclass
class NatureResult:
    value: Fraction
    stopped_mass: dict[str, Fraction]
    pre_flow: dict[str, Fraction]
    post_flow: dict[str, Fraction]
    lp: RationalLP = None
    solution: object = None

    def __float__(self):
        return float(self.value)


def build_nature_lp(inst: Instance) -> tuple[RationalLP, dict, dict, dict]:
    """Flows ``u`` (alive), ``y`` (exercised) per edge and stopped mass ``w`` per node."""
    lp = RationalLP("max", "nature")
    u = {v.id: lp.add_variable(f"u[{v.id}]") for v in inst.nodes if v.parent is not None}
    y = {v.id: lp.add_variable(f"y[{v.id}]") for v in inst.nodes if v.parent is not None}
    w = {v.id: lp.add_variable(f"w[{v.id}]") for v in inst.nodes}
    for n in inst.nodes:
        v = n.id
        kids = inst.children[v]
        # alive inflow = stopped here + alive outflow
        row = {w[v]: ONE}
        for c in kids:
            row[u[c]] = ONE
        if n.parent is None:
            lp.add_constraint(row, "=", 1, name=f"alive[{v}]")
        else:
            row[u[v]] = -ONE
            lp.add_constraint(row, "=", 0, name=f"alive[{v}]")
        if kids:
            # exercised outflow = exercised inflow + stopped here
            row = {y[c]: ONE for c in kids}
            row[w[v]] = -ONE
            if n.parent is not None:
                row[y[v]] = -ONE
            lp.add_constraint(row, "=", 0, name=f"exercised[{v}]")
            for k in range(inst.stock_dim):
                for flow, tag in ((u, "u"), (y, "y")):
                    lp.add_constraint({flow[c]: inst.increment(v, c)[k] for c in kids}, "=", 0,
                                      name=f"mart_{tag}[{v}][{k}]")
    for k in range(inst.option_count):
        row: dict[int, Fraction] = {}
        for leaf in inst.leaves:
            gk = inst.g(leaf)[k]
            if gk:
                row[w[leaf]] = row.get(w[leaf], ZERO) + gk
                if leaf in y:
                    row[y[leaf]] = row.get(y[leaf], ZERO) + gk
        lp.add_constraint(row, "=", 0, name=f"calib[{k}]")
    lp.set_objective({w[v.id]: v.phi for v in inst.nodes})
    return lp, u, y, w


def solve_nature_lp(inst: Instance) -> NatureResult:
    """Price under Nature's models: one occupation-measure LP."""
    lp, u, y, w = build_nature_lp(inst)
    sol = solve(lp)
    if sol.status != OPTIMAL:
        raise NoCalibratedModelError(f"occupation LP {sol.status}")
    x = sol.x
    return NatureResult(sol.objective, {v: x[j] for v, j in w.items()},
                        {v: x[j] for v, j in u.items()}, {v: x[j] for v, j in y.items()},
                        lp, sol)


# best single calibrated model -------------------------------------------

CALIBRATED_GUARD = 20


def calibrated_vertices(inst: Instance, guard: int | None = None) -> list[MartingaleMeasure]:
    """Vertices of the calibrated martingale polytope in leaf-weight space."""
    guard = polytope.guard_value(CALIBRATED_GUARD) if guard is None else guard
    n = len(inst.leaves)
    if n > guard:
        raise polytope.GuardExceeded(f"{n} leaves exceeds guard {guard}")
    A = [[ONE] * n]
    b = [ONE]
    for _, _, vec in inst.martingale_rows:
        A.append(list(vec))
        b.append(ZERO)
    for k in range(inst.option_count):
        A.append(list(inst.option_vector(k)))
        b.append(ZERO)
    return [MartingaleMeasure(inst, v) for v in polytope.vertices(A, b)]


def model_sup_calibrated(inst: Instance, guard: int | None = None) -> Fraction:
    """``max_{Q calibrated} sup_tau E_Q[Phi_tau]``.

    ``Q -> sup_tau E_Q[Phi_tau]`` is a max of linear functions, hence convex,
    so the maximum over the polytope sits at a vertex.
    """
    verts = calibrated_vertices(inst, guard)
    if not verts:
        raise NoCalibratedModelError("no calibrated martingale measure")
    return max(snell_value(inst, q)[0] for q in verts)


@dataclass
class GapResult:
    pi: Fraction
    model_price: Fraction
    gap: Fraction

    def __iter__(self):
        yield self.pi
        yield self.model_price
        yield self.gap


def duality_gap(inst: Instance, guard: int | None = None) -> GapResult:
    pi = solve_primal(inst).pi
    model = model_sup_calibrated(inst, guard)
    return GapResult(pi, model, pi - model)
