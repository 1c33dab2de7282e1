"""Randomized models on the enlarged space ``Omega x {1..n}``.

Nature draws the component label at time 0 and reveals it only to itself;
the enlarged filtration therefore contains the label from the start. Copies
of the tree are kept side by side, one per component, and ``Q'`` charges
leaf ``(omega, i)`` with ``c_i Q_i(omega)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .duals import MixtureModel, solve_e2, solve_nature_lp
from .errors import TheoremViolation
from .market_tree import Instance
from .primal import solve_primal
from .rational import fmt, fmt_vec
from .stopping import snell_value

ZERO = Fraction(0)


@dataclass(frozen=True)
class RandomizedModel:
    base: Instance
    weights: tuple[Fraction, ...]
    mixture: MixtureModel
    leaf_mass: dict = field(hash=False)  # (leaf, i) -> mass under Q'

    @property
    def n(self) -> int:
        return len(self.weights)

    @cached_property
    def enlarged_nodes(self) -> tuple[tuple[str, int], ...]:
        return tuple((v.id, i) for i in range(self.n) for v in self.base.nodes)

    def node_mass(self) -> dict[tuple[str, int], Fraction]:
        inst = self.base
        out = dict(self.leaf_mass)
        for i in range(self.n):
            for v in inst.backward_order:
                if (v, i) not in out:
                    out[(v, i)] = sum((out[(c, i)] for c in inst.children[v]), ZERO)
        return out

    def to_dict(self) -> dict:
        mass = self.node_mass()
        nodes = []
        for i in range(self.n):
            for n in self.base.nodes:
                d = {"id": f"{n.id}#{i}", "time": n.time,
                     "parent": None if n.parent is None else f"{n.parent}#{i}",
                     "component": i, "S": fmt_vec(n.S), "phi": fmt(n.phi),
                     "mass": fmt(mass[(n.id, i)])}
                if n.g is not None:
                    d["g"] = fmt_vec(n.g)
                nodes.append(d)
        return {"horizon": self.base.horizon, "stock_dim": self.base.stock_dim,
                "option_count": self.base.option_count, "components": self.n,
                "weights": fmt_vec(self.weights), "nodes": nodes}


def build_randomized_model(inst: Instance, mix: MixtureModel) -> RandomizedModel:
    mix = mix.on(inst)
    mix.validate()
    leaf_mass = {}
    for i, (c, q) in enumerate(mix.components):
        for leaf, w in zip(inst.leaves, q.leaf_weights):
            leaf_mass[(leaf, i)] = c * w
    return RandomizedModel(inst, mix.weights, mix, leaf_mass)


def consistency_problems(model: RandomizedModel) -> list[str]:
    """Reasons the model fails to be one of Nature's models (empty if consistent).

    The null-set condition is vacuous here: every base path is charged by
    the reference family, so ``Q'`` may charge any path.
    """
    inst = model.base
    out = []
    if any(m < 0 for m in model.leaf_mass.values()):
        out.append("negative mass")
    mass = model.node_mass()
    if sum((mass[(inst.root, i)] for i in range(model.n)), ZERO) != 1:
        out.append("total mass is not 1")
    for i in range(model.n):
        for v in inst.internal:
            if not mass[(v, i)]:
                continue
            for k in range(inst.stock_dim):
                drift = sum((mass[(c, i)] * inst.increment(v, c)[k] for c in inst.children[v]), ZERO)
                if drift:
                    out.append(f"S not a martingale at ({v}, {i})")
                    break
    for k in range(inst.option_count):
        price = sum((m * inst.g(leaf)[k] for (leaf, _), m in model.leaf_mass.items()), ZERO)
        if price:
            out.append(f"option {k} priced at {price}")
    return out


def check_consistency(model: RandomizedModel) -> bool:
    return not consistency_problems(model)


def enlarged_snell(model: RandomizedModel) -> Fraction:
    """Optimal stopping on the enlarged tree (stopping times may use the label)."""
    inst = model.base
    mass = model.node_mass()
    total = ZERO
    for i in range(model.n):
        V: dict[str, Fraction] = {}
        for v in inst.backward_order:
            kids = inst.children[v]
            m = mass[(v, i)]
            if not kids or not m:
                V[v] = inst.phi(v)
                continue
            cont = sum((mass[(c, i)] * V[c] for c in kids), ZERO) / m
            V[v] = max(inst.phi(v), cont)
        total += mass[(inst.root, i)] * V[inst.root]
    return total


def phi_M(model: RandomizedModel) -> Fraction:
    """American price under the randomized model; checked against ``sum c_i snell(Q_i)``."""
    value = enlarged_snell(model)
    weighted = sum((c * snell_value(model.base, q)[0] for c, q in model.mixture.components), ZERO)
    if value != weighted:
        raise TheoremViolation("enlarged Snell envelope differs from weighted component values",
                               {"enlarged": value, "weighted": weighted})
    return value


@dataclass
class CorollaryReport:
    pi: Fraction
    nature: Fraction
    randomized: Fraction
    consistent: bool
    components: int

    @property
    def holds(self) -> bool:
        return self.consistent and self.pi == self.nature == self.randomized

    def to_dict(self) -> dict:
        return {"chain": [fmt(self.pi), fmt(self.nature), fmt(self.randomized)],
                "pi": fmt(self.pi), "sup_nature_models": fmt(self.nature),
                "sup_randomized_models": fmt(self.randomized),
                "consistent": self.consistent, "components": self.components,
                "holds": self.holds}


def verify_corollary(inst: Instance) -> CorollaryReport:
    """Hedging price vs. Nature's models vs. the best randomized model."""
    pi = solve_primal(inst).pi
    nature = solve_nature_lp(inst).value
    mix = solve_e2(inst).mixture
    model = build_randomized_model(inst, mix)
    return CorollaryReport(pi, nature, phi_M(model), check_consistency(model), model.n)
