"""Finite scenario-tree markets.

An :class:`Instance` is a rooted tree whose leaves all sit at the horizon.
Each node carries the stock price vector and the American payoff if
exercised there; each leaf also carries the European option payoffs, already
netted so that their time-0 price is zero.

Every path of the tree is charged by the reference family of measures, so
statements that hold quasi-surely hold at every leaf.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Callable, Mapping, Optional, Sequence

from . import linalg
from .exact_lp import OPTIMAL, RationalLP, solve
from .rational import fmt, fmt_vec, parse_rational

ZERO = Fraction(0)


class InstanceError(ValueError):
    """Malformed or structurally invalid instance."""


@dataclass(frozen=True)
class Node:
    id: str
    time: int
    parent: Optional[str]
    S: tuple[Fraction, ...]
    phi: Fraction
    g: Optional[tuple[Fraction, ...]] = None


@dataclass(frozen=True)
class Instance:
    horizon: int
    stock_dim: int
    option_count: int
    nodes: tuple[Node, ...]

    def __post_init__(self):
        _validate(self)

    # tree structure ----------------------------------------------------
    @cached_property
    def by_id(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def root(self) -> str:
        return next(n.id for n in self.nodes if n.parent is None)

    @cached_property
    def children(self) -> dict[str, tuple[str, ...]]:
        kids: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for n in self.nodes:
            if n.parent is not None:
                kids[n.parent].append(n.id)
        return {k: tuple(v) for k, v in kids.items()}

    @cached_property
    def leaves(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes if not self.children[n.id])

    @cached_property
    def leaf_pos(self) -> dict[str, int]:
        return {leaf: i for i, leaf in enumerate(self.leaves)}

    @cached_property
    def internal(self) -> tuple[str, ...]:
        """Non-leaf nodes ordered by time (stable within a layer)."""
        inner = [n for n in self.nodes if self.children[n.id]]
        return tuple(n.id for n in sorted(inner, key=lambda n: n.time))

    @cached_property
    def layers(self) -> tuple[tuple[str, ...], ...]:
        out: list[list[str]] = [[] for _ in range(self.horizon + 1)]
        for n in self.nodes:
            out[n.time].append(n.id)
        return tuple(tuple(layer) for layer in out)

    @cached_property
    def backward_order(self) -> tuple[str, ...]:
        return tuple(v for layer in reversed(self.layers) for v in layer)

    @cached_property
    def paths(self) -> dict[str, tuple[str, ...]]:
        """Root-to-leaf node sequence for every leaf."""
        out = {}
        for leaf in self.leaves:
            p = [leaf]
            while self.by_id[p[-1]].parent is not None:
                p.append(self.by_id[p[-1]].parent)
            out[leaf] = tuple(reversed(p))
        return out

    @cached_property
    def leaves_under(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for leaf in self.leaves:
            for v in self.paths[leaf]:
                out[v].append(leaf)
        return {k: tuple(v) for k, v in out.items()}

    def increment(self, v: str, child: str) -> tuple[Fraction, ...]:
        a, b = self.by_id[v].S, self.by_id[child].S
        return tuple(y - x for x, y in zip(a, b))

    def g(self, leaf: str) -> tuple[Fraction, ...]:
        return self.by_id[leaf].g

    def phi(self, v: str) -> Fraction:
        return self.by_id[v].phi

    @cached_property
    def martingale_rows(self) -> tuple[tuple[str, int, tuple[Fraction, ...]], ...]:
        """(node, dim, leaf vector) for every one-step gain of a unit stock position.

        The same vectors serve two roles: the terminal gain of holding one
        unit of stock ``dim`` at node ``v`` only, and the coefficients of the
        martingale condition at ``v`` in leaf-weight space.
        """
        rows = []
        for v in self.internal:
            for k in range(self.stock_dim):
                vec = [ZERO] * len(self.leaves)
                for c in self.children[v]:
                    inc = self.increment(v, c)[k]
                    if inc:
                        for leaf in self.leaves_under[c]:
                            vec[self.leaf_pos[leaf]] = inc
                rows.append((v, k, tuple(vec)))
        return tuple(rows)

    def option_vector(self, k: int) -> tuple[Fraction, ...]:
        return tuple(self.by_id[leaf].g[k] for leaf in self.leaves)

    def gains(self, H: Mapping[str, Sequence[Fraction]], h: Sequence[Fraction]) -> dict[str, Fraction]:
        """Terminal value of ``(H . S)_T + h g`` at every leaf."""
        out = {}
        for leaf in self.leaves:
            path = self.paths[leaf]
            total = ZERO
            for v, c in zip(path, path[1:]):
                hv = H.get(v)
                if hv is not None:
                    total += sum((a * b for a, b in zip(hv, self.increment(v, c))), ZERO)
            total += sum((a * b for a, b in zip(h, self.by_id[leaf].g)), ZERO)
            out[leaf] = total
        return out

    # derived instances -------------------------------------------------
    def with_options(self, keep: Sequence[int]) -> "Instance":
        keep = list(keep)
        nodes = tuple(
            replace(n, g=tuple(n.g[k] for k in keep)) if n.g is not None else n
            for n in self.nodes)
        return Instance(self.horizon, self.stock_dim, len(keep), nodes)

    def with_phi(self, fn: Callable[[Node], Fraction]) -> "Instance":
        nodes = tuple(replace(n, phi=Fraction(fn(n))) for n in self.nodes)
        return Instance(self.horizon, self.stock_dim, self.option_count, nodes)

    def add_option(self, payoff: Callable[[Node], Fraction]) -> "Instance":
        nodes = tuple(
            replace(n, g=n.g + (Fraction(payoff(n)),)) if n.g is not None else n
            for n in self.nodes)
        return Instance(self.horizon, self.stock_dim, self.option_count + 1, nodes)

    @cached_property
    def max_abs_phi(self) -> Fraction:
        return max(abs(n.phi) for n in self.nodes)


def _validate(inst: Instance) -> None:
    if not isinstance(inst.horizon, int) or inst.horizon < 1:
        raise InstanceError("horizon must be an integer >= 1")
    if not isinstance(inst.stock_dim, int) or inst.stock_dim < 1:
        raise InstanceError("stock_dim must be an integer >= 1")
    if not isinstance(inst.option_count, int) or inst.option_count < 0:
        raise InstanceError("option_count must be an integer >= 0")
    ids: dict[str, Node] = {}
    for n in inst.nodes:
        if n.id in ids:
            raise InstanceError(f"duplicate node id {n.id!r}")
        ids[n.id] = n
    roots = [n for n in inst.nodes if n.parent is None]
    if len(roots) != 1:
        raise InstanceError(f"expected exactly one root, found {len(roots)}")
    if roots[0].time != 0:
        raise InstanceError("root must be at time 0")
    has_child = set()
    for n in inst.nodes:
        if len(n.S) != inst.stock_dim:
            raise InstanceError(f"node {n.id!r}: S has length {len(n.S)}, expected {inst.stock_dim}")
        if not 0 <= n.time <= inst.horizon:
            raise InstanceError(f"node {n.id!r}: time {n.time} outside [0, {inst.horizon}]")
        if n.parent is not None:
            p = ids.get(n.parent)
            if p is None:
                raise InstanceError(f"node {n.id!r}: orphan (unknown parent {n.parent!r})")
            if n.time != p.time + 1:
                raise InstanceError(
                    f"node {n.id!r}: time {n.time} but parent {p.id!r} at time {p.time}")
            has_child.add(n.parent)
    for n in inst.nodes:
        leaf = n.id not in has_child
        if leaf and n.time != inst.horizon:
            raise InstanceError(f"leaf {n.id!r} at time {n.time}, expected {inst.horizon}")
        if leaf:
            if n.g is None:
                raise InstanceError(f"leaf {n.id!r}: missing option payoffs g")
            if len(n.g) != inst.option_count:
                raise InstanceError(
                    f"leaf {n.id!r}: g has length {len(n.g)}, expected {inst.option_count}")
        elif n.g is not None:
            raise InstanceError(f"non-leaf node {n.id!r} carries g")


# serialization ----------------------------------------------------------

def instance_from_dict(data: Mapping) -> Instance:
    try:
        nodes = []
        for raw in data["nodes"]:
            g = raw.get("g")
            nodes.append(Node(
                id=str(raw["id"]),
                time=int(raw["time"]),
                parent=None if raw.get("parent") is None else str(raw["parent"]),
                S=tuple(parse_rational(v) for v in raw["S"]),
                phi=parse_rational(raw["phi"]),
                g=None if g is None else tuple(parse_rational(v) for v in g),
            ))
        return Instance(int(data["horizon"]), int(data["stock_dim"]),
                        int(data["option_count"]), tuple(nodes))
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"malformed instance: {exc!r}") from None


def instance_to_dict(inst: Instance) -> dict:
    nodes = []
    for n in inst.nodes:
        d = {"id": n.id, "time": n.time, "parent": n.parent,
             "S": fmt_vec(n.S), "phi": fmt(n.phi)}
        if n.g is not None:
            d["g"] = fmt_vec(n.g)
        nodes.append(d)
    return {"horizon": inst.horizon, "stock_dim": inst.stock_dim,
            "option_count": inst.option_count, "nodes": nodes}


def load_instance(text: str) -> Instance:
    """Parse an instance from its JSON text."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InstanceError("instance JSON must be an object")
    return instance_from_dict(data)


def dumps_instance(inst: Instance, indent: int | None = 2) -> str:
    return json.dumps(instance_to_dict(inst), indent=indent)


# fixtures ---------------------------------------------------------------

def build_tree(T: int, spec: Mapping[str, tuple], e: int) -> Instance:
    """Build an instance from ``{id: (parent, S, phi[, g])}`` with scalar or vector S."""
    nodes = []
    times: dict[str, int] = {}
    for nid, entry in spec.items():
        parent, S, phi = entry[0], entry[1], entry[2]
        g = entry[3] if len(entry) > 3 else None
        t = 0 if parent is None else times[parent] + 1
        times[nid] = t
        S = (S,) if not isinstance(S, (tuple, list)) else tuple(S)
        nodes.append(Node(nid, t, parent, tuple(Fraction(v) for v in S), Fraction(phi),
                          None if g is None else tuple(Fraction(v) for v in g)))
    return Instance(T, len(nodes[0].S), e, tuple(nodes))


def _inst_bin(phi: Callable[[Fraction], Fraction]) -> Instance:
    half = Fraction(1, 2)

    def g(s):
        return (max(Fraction(s) - 2, ZERO) - half,)

    spec = {
        "r": (None, 2, phi(2)),
        "r0": ("r", 1, phi(1)),
        "r1": ("r", 3, phi(3)),
        "r00": ("r0", 0, phi(0), g(0)),
        "r01": ("r0", 2, phi(2), g(2)),
        "r10": ("r1", 2, phi(2), g(2)),
        "r11": ("r1", 4, phi(4), g(4)),
    }
    return build_tree(2, spec, 1)


def _put(s) -> Fraction:
    return max(2 - Fraction(s), ZERO)


FIXTURE_NAMES = ("INST_ZERO", "INST_SINGLE", "INST_BIN", "INST_GAP")


def fixture(name: str) -> Instance:
    """The named reference instance."""
    if name == "INST_BIN":
        return _inst_bin(_put)
    if name == "INST_ZERO":
        return _inst_bin(lambda s: ZERO)
    if name == "INST_SINGLE":
        return build_tree(2, {"r": (None, 1, 0), "r0": ("r", 1, 3), "r00": ("r0", 1, 1, ())}, 0)
    if name == "INST_GAP":
        third = Fraction(1, 3)

        def g(s):
            return (max(Fraction(s) - 2, ZERO) - third,)

        spec = {
            "r": (None, 2, third),
            "r0": ("r", 1, _put(1), g(1)),
            "r1": ("r", 2, _put(2), g(2)),
            "r2": ("r", 4, _put(4), g(4)),
        }
        return build_tree(1, spec, 1)
    raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURE_NAMES)}")


# validation -------------------------------------------------------------

@dataclass
class ValidationReport:
    structural_ok: bool
    na_ok: bool
    redundant_option_indices: list[int] = field(default_factory=list)
    certificate: dict = field(default_factory=dict)
    ftap_consistent: bool = True
    errors: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "structural_ok": self.structural_ok,
            "na_ok": self.na_ok,
            "redundant_option_indices": list(self.redundant_option_indices),
            "certificate": self.certificate,
            "ftap_consistent": self.ftap_consistent,
            "errors": list(self.errors),
        }


def find_arbitrage(inst: Instance) -> Optional[tuple[dict[str, tuple[Fraction, ...]], tuple[Fraction, ...]]]:
    """A strategy (H, h) whose gains are >= 0 at every leaf and sum to >= 1, if any."""
    lp = RationalLP("min", "arbitrage")
    hv = {}
    for v in inst.internal:
        hv[v] = [lp.add_variable(f"H[{v}][{k}]", lower=None) for k in range(inst.stock_dim)]
    hh = [lp.add_variable(f"h[{k}]", lower=None) for k in range(inst.option_count)]
    total: dict[int, Fraction] = {}
    for leaf in inst.leaves:
        row: dict[int, Fraction] = {}
        path = inst.paths[leaf]
        for v, c in zip(path, path[1:]):
            for k, inc in enumerate(inst.increment(v, c)):
                if inc:
                    row[hv[v][k]] = row.get(hv[v][k], ZERO) + inc
        for k, gk in enumerate(inst.g(leaf)):
            if gk:
                row[hh[k]] = row.get(hh[k], ZERO) + gk
        lp.add_constraint(row, ">=", 0, name=f"gain[{leaf}]")
        for j, a in row.items():
            total[j] = total.get(j, ZERO) + a
    lp.add_constraint(total, ">=", 1, name="total")
    sol = solve(lp)
    if sol.status != OPTIMAL:
        return None
    H = {v: tuple(sol.x[j] for j in idx) for v, idx in hv.items()}
    h = tuple(sol.x[j] for j in hh)
    return H, h


def positive_calibrated_measure(inst: Instance, calibrate: bool = True) -> Optional[tuple[Fraction, ...]]:
    """Leaf weights of a strictly positive martingale measure (pricing g at 0), if one exists."""
    lp = RationalLP("max", "positive_measure")
    q = [lp.add_variable(f"q[{leaf}]") for leaf in inst.leaves]
    eps = lp.add_variable("eps", upper=1)
    for j in q:
        lp.add_constraint({j: 1, eps: -1}, ">=", 0)
    lp.add_constraint({j: 1 for j in q}, "=", 1, name="mass")
    for v, k, vec in inst.martingale_rows:
        lp.add_constraint({q[i]: a for i, a in enumerate(vec) if a}, "=", 0, name=f"mart[{v}][{k}]")
    if calibrate:
        for k in range(inst.option_count):
            vec = inst.option_vector(k)
            lp.add_constraint({q[i]: a for i, a in enumerate(vec) if a}, "=", 0, name=f"calib[{k}]")
    lp.set_objective({eps: 1})
    sol = solve(lp)
    if sol.status != OPTIMAL or sol.objective <= 0:
        return None
    return tuple(sol.x[j] for j in q)


def check_no_arbitrage(inst: Instance) -> ValidationReport:
    """Decide NA by the dominating-strategy LP and cross-check it against FTAP."""
    arb = find_arbitrage(inst)
    measure = positive_calibrated_measure(inst)
    na_ok = arb is None
    report = ValidationReport(structural_ok=True, na_ok=na_ok,
                              ftap_consistent=(measure is not None) == na_ok)
    if arb is not None:
        H, h = arb
        report.certificate = {
            "H": {v: fmt_vec(vec) for v, vec in H.items()},
            "h": fmt_vec(h),
            "gains": {leaf: fmt(x) for leaf, x in inst.gains(H, h).items()},
        }
        report.errors.append("arbitrage: a semi-static strategy dominates zero")
    else:
        if measure is not None:
            report.certificate = {"measure": fmt_vec(measure)}
        report.redundant_option_indices = redundant_options(inst)
    return report


def is_replicable(inst: Instance, k: int, others: Sequence[int]) -> bool:
    """Whether option ``k`` equals a stock gain plus a combination of ``others`` pathwise."""
    columns = [vec for _, _, vec in inst.martingale_rows]
    columns += [inst.option_vector(j) for j in others]
    return linalg.in_column_span(columns, inst.option_vector(k))


def redundant_options(inst: Instance) -> list[int]:
    keep = list(range(inst.option_count))
    removed = []
    for k in reversed(range(inst.option_count)):
        others = [j for j in keep if j != k]
        if is_replicable(inst, k, others):
            keep.remove(k)
            removed.append(k)
    return sorted(removed)


def reduce_redundant_options(inst: Instance) -> tuple[Instance, list[int]]:
    """Drop options replicable by stock and the other options (highest index first)."""
    removed = redundant_options(inst)
    if not removed:
        return inst, []
    keep = [k for k in range(inst.option_count) if k not in removed]
    return inst.with_options(keep), removed
