"""Random instances that satisfy no-arbitrage by construction.

Every node's stock increments have 0 in the relative interior of their
convex hull, so a strictly positive martingale measure exists; options are
calls, puts and digitals netted at their price under one such measure
(found by LP), which makes that measure calibrated too.
"""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional

from .market_tree import Instance, Node, positive_calibrated_measure

ZERO = Fraction(0)


def _increments(rng: random.Random, k: int, d: int) -> list[tuple[Fraction, ...]]:
    if k == 1:
        return [(ZERO,) * d]
    if k == 2:
        while True:
            u = tuple(Fraction(rng.randint(-2, 2)) for _ in range(d))
            if any(u):
                break
        lam = rng.choice([Fraction(1), Fraction(2), Fraction(1, 2)])
        out = [u, tuple(-lam * x for x in u)]
    elif d == 1:
        out = [(Fraction(-rng.randint(1, 3)),), (Fraction(rng.randint(1, 3)),),
               (Fraction(rng.randint(-3, 3)),)]
        out += [(Fraction(rng.randint(-3, 3)),) for _ in range(k - 3)]
    else:
        # rejection: 0 strictly inside the triangle of three planar points
        while True:
            pts = [tuple(Fraction(rng.randint(-2, 2)) for _ in range(d)) for _ in range(k)]
            if _zero_inside(pts):
                out = pts
                break
    rng.shuffle(out)
    return out


def _zero_inside(pts) -> bool:
    if len(pts) != 3 or len(pts[0]) != 2:
        return False
    (ax, ay), (bx, by), (cx, cy) = pts

    def cross(px, py, qx, qy):
        return px * qy - py * qx

    s1 = cross(ax, ay, bx, by)
    s2 = cross(bx, by, cx, cy)
    s3 = cross(cx, cy, ax, ay)
    return (s1 > 0 and s2 > 0 and s3 > 0) or (s1 < 0 and s2 < 0 and s3 < 0)


def _payoff(kind: str, s: Fraction, strike: Fraction) -> Fraction:
    if kind == "call":
        return max(s - strike, ZERO)
    if kind == "put":
        return max(strike - s, ZERO)
    return Fraction(1) if s >= strike else ZERO


def random_tree(rng: random.Random, T: int, d: int, max_children: int = 3,
                max_leaves: Optional[int] = None) -> list[dict]:
    while True:
        s0 = tuple(Fraction(rng.randint(3, 6)) for _ in range(d))
        raw = [{"id": "r", "time": 0, "parent": None, "S": s0}]
        frontier = [raw[0]]
        for t in range(1, T + 1):
            nxt = []
            for parent in frontier:
                if d == 2:
                    k = rng.choice([1, 2, 3, 3] if max_children >= 3 else [1, 2][:max_children])
                else:
                    k = rng.randint(1, max_children) if max_children > 1 else 1
                    if k == 1 and rng.random() < 0.6:
                        k = min(2, max_children)
                for j, inc in enumerate(_increments(rng, k, d)):
                    node = {"id": f"{parent['id']}{j}", "time": t, "parent": parent["id"],
                            "S": tuple(a + b for a, b in zip(parent["S"], inc))}
                    raw.append(node)
                    nxt.append(node)
            frontier = nxt
        if max_leaves is None or len(frontier) <= max_leaves:
            return raw


def random_instance(rng: random.Random, max_horizon: int = 3, max_children: int = 3,
                    max_dim: int = 2, max_options: int = 2,
                    max_leaves: Optional[int] = 12) -> Instance:
    """One random NA-passing instance (horizon, dims, options drawn uniformly)."""
    T = rng.randint(1, max_horizon)
    d = rng.randint(1, max_dim)
    e = rng.randint(0, max_options)
    raw = random_tree(rng, T, d, max_children, max_leaves)
    style = rng.choice(["put", "call", "noise"])
    strike = Fraction(rng.randint(3, 6))
    for n in raw:
        s = n["S"][0]
        if style == "put":
            n["phi"] = max(strike - s, ZERO)
        elif style == "call":
            n["phi"] = max(s - strike, ZERO)
        else:
            n["phi"] = Fraction(rng.randint(0, 3))
    leaf_ids = {n["id"] for n in raw if n["time"] == T}
    for n in raw:
        n["g"] = () if n["id"] in leaf_ids else None
    nodes = tuple(Node(n["id"], n["time"], n["parent"], n["S"], n["phi"], n["g"]) for n in raw)
    inst = Instance(T, d, 0, nodes)
    if e == 0:
        return inst
    q0 = positive_calibrated_measure(inst, calibrate=False)
    leaves = [inst.by_id[leaf] for leaf in inst.leaves]
    options = []
    for _ in range(e):
        kind = rng.choice(["call", "put", "digital"])
        asset = rng.randrange(d)
        strike = rng.choice(leaves).S[asset]
        pay = [_payoff(kind, leaf.S[asset], strike) for leaf in leaves]
        price = sum((w * p for w, p in zip(q0, pay)), ZERO)
        options.append([p - price for p in pay])
    g = {leaf: tuple(opt[i] for opt in options) for i, leaf in enumerate(inst.leaves)}
    nodes = tuple(Node(n.id, n.time, n.parent, n.S, n.phi, g.get(n.id)) for n in nodes)
    return Instance(T, d, e, nodes)


def gap_candidate(rng: random.Random) -> Instance:
    """One-period trinomial-style market with one option, the INST_GAP pattern."""
    k = rng.choice([3, 3, 4])
    s0 = Fraction(rng.randint(2, 5))
    while True:
        incs = sorted({rng.randint(-3, 3) for _ in range(k)})
        if len(incs) >= 3 and incs[0] < 0 < incs[-1]:
            break
    nodes = [{"id": "r", "time": 0, "parent": None, "S": (s0,)}]
    for j, inc in enumerate(incs):
        nodes.append({"id": f"r{j}", "time": 1, "parent": "r", "S": (s0 + inc,)})
    strike = s0 + rng.choice([-1, 0, 1])
    for n in nodes:
        n["phi"] = max(strike - n["S"][0], ZERO) if n["time"] else Fraction(rng.randint(0, 2), rng.randint(1, 3))
    leaf_nodes = [n for n in nodes if n["time"] == 1]
    base = Instance(1, 1, 0, tuple(
        Node(n["id"], n["time"], n["parent"], n["S"], n["phi"], () if n["time"] else None)
        for n in nodes))
    q0 = positive_calibrated_measure(base, calibrate=False)
    kind = rng.choice(["call", "put", "digital"])
    kstrike = rng.choice(leaf_nodes)["S"][0]
    pay = [_payoff(kind, n["S"][0], kstrike) for n in leaf_nodes]
    # price anywhere inside the no-arbitrage interval keeps NA
    price = sum((w * p for w, p in zip(q0, pay)), ZERO)
    g = {n["id"]: (p - price,) for n, p in zip(leaf_nodes, pay)}
    return Instance(1, 1, 1, tuple(
        Node(n["id"], n["time"], n["parent"], n["S"], n["phi"], g.get(n["id"])) for n in nodes))
