"""Optimal stopping on a scenario tree.

``snell_value`` is the classical backward recursion under one fixed measure.
``joint_sup`` maximizes ``E_Q[Phi_tau - h g]`` jointly over martingale
measures and stopping times, carrying two value functions: ``W`` for nodes
where the option is still alive and ``U`` for nodes after exercise. Because
whether the option has been exercised at a node is known at that node, the
kernels chosen below it serve exactly one of the two cases.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Optional, Sequence

from .exact_lp import OPTIMAL, RationalLP, solve
from .market_tree import Instance

ZERO = Fraction(0)
ONE = Fraction(1)


class LocalArbitrageError(ValueError):
    """Some node admits no one-step martingale kernel."""


class MeasureError(ValueError):
    """Measure does not fit the tree or violates the martingale property."""


def _dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), ZERO)


@dataclass(frozen=True)
class MartingaleMeasure:
    """Leaf weights on a tree; node masses and kernels are derived from them."""

    instance: Instance
    leaf_weights: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.leaf_weights) != len(self.instance.leaves):
            raise MeasureError(
                f"{len(self.leaf_weights)} leaf weights for {len(self.instance.leaves)} leaves")

    @classmethod
    def from_kernels(cls, inst: Instance, kernels: Mapping[str, Mapping[str, Fraction]]) -> "MartingaleMeasure":
        """Product of one-step kernels; nodes without a kernel must carry zero mass."""
        mass = {inst.root: ONE}
        for layer in inst.layers[:-1]:
            for v in layer:
                m = mass.get(v, ZERO)
                kern = kernels.get(v)
                for c in inst.children[v]:
                    mass[c] = m * kern.get(c, ZERO) if (m and kern) else ZERO
        return cls(inst, tuple(mass[leaf] for leaf in inst.leaves))

    @classmethod
    def dirac(cls, inst: Instance, leaf: str) -> "MartingaleMeasure":
        return cls(inst, tuple(ONE if x == leaf else ZERO for x in inst.leaves))

    def on(self, inst: Instance) -> "MartingaleMeasure":
        """Same weights on another instance with the same tree (e.g. fewer options)."""
        if inst.leaves != self.instance.leaves:
            raise MeasureError("trees differ")
        return MartingaleMeasure(inst, self.leaf_weights)

    @cached_property
    def mass(self) -> dict[str, Fraction]:
        inst = self.instance
        out = {leaf: w for leaf, w in zip(inst.leaves, self.leaf_weights)}
        for v in inst.backward_order:
            if v not in out:
                out[v] = sum((out[c] for c in inst.children[v]), ZERO)
        return out

    def kernel(self, v: str) -> Optional[dict[str, Fraction]]:
        m = self.mass[v]
        if not m:
            return None
        return {c: self.mass[c] / m for c in self.instance.children[v]}

    def martingale_defects(self) -> list[str]:
        """Nodes (with positive mass) where the conditional increment is nonzero."""
        inst = self.instance
        bad = []
        for v in inst.internal:
            if not self.mass[v]:
                continue
            for k in range(inst.stock_dim):
                if sum((self.mass[c] * inst.increment(v, c)[k] for c in inst.children[v]), ZERO):
                    bad.append(v)
                    break
        return bad

    def is_valid(self) -> bool:
        return (all(w >= 0 for w in self.leaf_weights)
                and sum(self.leaf_weights, ZERO) == 1
                and not self.martingale_defects())

    def validate(self) -> None:
        if any(w < 0 for w in self.leaf_weights):
            raise MeasureError("negative leaf weight")
        if sum(self.leaf_weights, ZERO) != 1:
            raise MeasureError("leaf weights do not sum to 1")
        bad = self.martingale_defects()
        if bad:
            raise MeasureError(f"martingale condition fails at {bad}")

    def expect_g(self) -> tuple[Fraction, ...]:
        inst = self.instance
        out = [ZERO] * inst.option_count
        for leaf, w in zip(inst.leaves, self.leaf_weights):
            if w:
                for k, gk in enumerate(inst.g(leaf)):
                    out[k] += w * gk
        return tuple(out)

    def is_calibrated(self) -> bool:
        return all(v == 0 for v in self.expect_g())

    @cached_property
    def support(self) -> frozenset[str]:
        return frozenset(v for v, m in self.mass.items() if m)


@dataclass(frozen=True)
class StoppingRule:
    """Per-node probability of stopping given the option is still alive there."""

    stop_probability: Mapping[str, Fraction]

    @classmethod
    def from_stop_nodes(cls, inst: Instance, nodes) -> "StoppingRule":
        """Deterministic rule stopping at the first node of ``nodes`` on each path."""
        nodes = set(nodes)
        probs = {}
        for v in inst.nodes:
            probs[v.id] = ONE if (v.id in nodes or not inst.children[v.id]) else ZERO
        return cls(probs)

    def is_deterministic(self) -> bool:
        return all(p in (0, 1) for p in self.stop_probability.values())

    def stop_set(self, inst: Instance) -> frozenset[str]:
        """First-hitting nodes (where alive mass is exercised)."""
        out = set()
        stack = [inst.root]
        while stack:
            v = stack.pop()
            if self.stop_probability[v] == 1:
                out.add(v)
            else:
                stack.extend(inst.children[v])
        return frozenset(out)


@dataclass(frozen=True)
class JointValue:
    value: Fraction
    measure: MartingaleMeasure
    rule: StoppingRule
    h: tuple[Fraction, ...]

    @property
    def subgradient(self) -> tuple[Fraction, ...]:
        """A subgradient of ``h -> joint_sup(h)`` at ``h``."""
        return tuple(-x for x in self.measure.expect_g())


def evaluate(inst: Instance, Q: MartingaleMeasure, rule: StoppingRule,
             h: Sequence[Fraction] = ()) -> Fraction:
    """``E_Q[Phi_tau - h g]`` by a forward pass over stopped masses."""
    h = tuple(h) or (ZERO,) * inst.option_count
    alive = {inst.root: ONE}
    total = ZERO
    for layer in inst.layers:
        for v in layer:
            a = alive.get(v, ZERO)
            p = rule.stop_probability[v]
            stopped = a * p
            if stopped:
                total += stopped * inst.phi(v)
            rest = a - stopped
            if rest and inst.children[v]:
                kern = Q.kernel(v)
                for c in inst.children[v]:
                    alive[c] = rest * kern[c]
    if inst.option_count:
        total -= _dot(h, Q.expect_g())
    return total


def snell_value(inst: Instance, Q: MartingaleMeasure) -> tuple[Fraction, StoppingRule]:
    """Snell envelope at the root under ``Q`` and its first-hitting rule (ties stop)."""
    if Q.instance.leaves != inst.leaves:
        raise MeasureError("measure belongs to a different tree")
    V: dict[str, Fraction] = {}
    stop: dict[str, Fraction] = {}
    for v in inst.backward_order:
        phi = inst.phi(v)
        kids = inst.children[v]
        kern = Q.kernel(v) if kids else None
        if kern is None:
            V[v] = phi
            stop[v] = ONE
            continue
        cont = sum((kern[c] * V[c] for c in kids), ZERO)
        if phi >= cont:
            V[v], stop[v] = phi, ONE
        else:
            V[v], stop[v] = cont, ZERO
    return V[inst.root], StoppingRule(stop)


def one_step_sup(inst: Instance, v: str, values: Mapping[str, Fraction]) -> tuple[Fraction, dict[str, Fraction]]:
    """Max of ``sum_c q_c values[c]`` over martingale kernels q at ``v``."""
    kids = inst.children[v]
    lp = RationalLP("max", f"kernel[{v}]")
    q = [lp.add_variable(f"q[{c}]") for c in kids]
    lp.add_constraint({j: 1 for j in q}, "=", 1)
    for k in range(inst.stock_dim):
        lp.add_constraint({q[i]: inst.increment(v, c)[k] for i, c in enumerate(kids)}, "=", 0)
    lp.set_objective({q[i]: values[c] for i, c in enumerate(kids)})
    sol = solve(lp)
    if sol.status != OPTIMAL:
        raise LocalArbitrageError(f"no martingale kernel at node {v!r}")
    return sol.objective, {c: sol.x[j] for c, j in zip(kids, q)}


def joint_sup(inst: Instance, h: Sequence[Fraction] = ()) -> JointValue:
    """``sup_Q sup_tau E_Q[Phi_tau - h g]`` with an attaining (Q, tau)."""
    h = tuple(Fraction(x) for x in h)
    if len(h) != inst.option_count:
        raise ValueError(f"h has length {len(h)}, expected {inst.option_count}")
    U: dict[str, Fraction] = {}
    W: dict[str, Fraction] = {}
    kern_post: dict[str, dict] = {}
    kern_pre: dict[str, dict] = {}
    stops: dict[str, bool] = {}
    for leaf in inst.leaves:
        hg = _dot(h, inst.g(leaf))
        U[leaf] = -hg
        W[leaf] = inst.phi(leaf) - hg
        stops[leaf] = True
    for v in reversed(inst.internal):
        U[v], kern_post[v] = one_step_sup(inst, v, U)
        cont, kern_pre[v] = one_step_sup(inst, v, W)
        stop_val = inst.phi(v) + U[v]
        if stop_val >= cont:
            W[v], stops[v] = stop_val, True
        else:
            W[v], stops[v] = cont, False

    kernels: dict[str, dict] = {}
    probs: dict[str, Fraction] = {}
    stack = [(inst.root, False)]
    while stack:
        v, exercised = stack.pop()
        if exercised:
            probs[v] = ONE
        else:
            probs[v] = ONE if stops[v] else ZERO
            exercised = stops[v]
        if inst.children[v]:
            kernels[v] = kern_post[v] if exercised else kern_pre[v]
            for c in inst.children[v]:
                stack.append((c, exercised))
    Q = MartingaleMeasure.from_kernels(inst, kernels)
    return JointValue(W[inst.root], Q, StoppingRule(probs), h)
