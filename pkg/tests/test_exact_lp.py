import dataclasses
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from semistatic import polytope
from semistatic.exact_lp import (BACKENDS, INFEASIBLE, OPTIMAL, UNBOUNDED, RationalLP,
                                 get_backend, solve, verify_certificate)


def simple_max():
    lp = RationalLP("max")
    x = lp.add_variable("x")
    lp.add_constraint({x: 1}, "<=", 3)
    lp.set_objective({x: 1})
    return lp


def simple_infeasible():
    lp = RationalLP("min")
    x = lp.add_variable("x", lower=None)
    lp.add_constraint({x: 1}, ">=", 1)
    lp.add_constraint({x: 1}, "<=", 0)
    lp.set_objective({})
    return lp


def test_max_bounded():
    sol = solve(simple_max())
    assert sol.status == OPTIMAL
    assert sol.objective == 3
    assert sol.x == [F(3)]
    assert verify_certificate(simple_max(), sol)


def test_infeasible_with_farkas():
    lp = simple_infeasible()
    sol = solve(lp)
    assert sol.status == INFEASIBLE
    assert sol.farkas is not None
    assert verify_certificate(lp, sol)


def test_unbounded_ray():
    lp = RationalLP("min")
    x = lp.add_variable("x", lower=None)
    lp.add_constraint({x: 1}, "<=", 5)
    lp.set_objective({x: 1})
    sol = solve(lp)
    assert sol.status == UNBOUNDED
    assert verify_certificate(lp, sol)


def test_perturbed_primal_rejected():
    lp = simple_max()
    sol = solve(lp)
    bad = dataclasses.replace(sol, x=[sol.x[0] + F(1, 10**6)])
    assert not verify_certificate(lp, bad)
    bad = dataclasses.replace(sol, x=[sol.x[0] - F(1, 10**6)])
    assert not verify_certificate(lp, bad)


def test_wrong_farkas_rejected():
    lp = simple_infeasible()
    sol = solve(lp)
    flipped = dataclasses.replace(sol, farkas=[-y for y in sol.farkas])
    assert not verify_certificate(lp, flipped)


def test_equality_and_bounds():
    # min x + 2y, x + y = 4, 1 <= x <= 3, y free
    lp = RationalLP("min")
    x = lp.add_variable("x", lower=1, upper=3)
    y = lp.add_variable("y", lower=None)
    lp.add_constraint({x: 1, y: 1}, "=", 4)
    lp.set_objective({x: 1, y: 2})
    sol = solve(lp)
    assert sol.status == OPTIMAL
    assert sol.x == [F(3), F(1)]
    assert sol.objective == 5
    assert verify_certificate(lp, sol)


def test_redundant_rows():
    lp = RationalLP("max")
    x = lp.add_variable("x")
    y = lp.add_variable("y")
    lp.add_constraint({x: 1, y: 1}, "=", 1)
    lp.add_constraint({x: 2, y: 2}, "=", 2)
    lp.set_objective({x: 1})
    sol = solve(lp)
    assert sol.objective == 1
    assert verify_certificate(lp, sol)


def test_lp_format_mentions_everything():
    text = simple_max().to_lp_format()
    assert "Maximize" in text and "x <= 3" in text.replace(" + ", " ")


def _vertex_optimum(A, b, c):
    """max c.x over Ax <= b, x >= 0 by enumerating vertices of [A I]."""
    m, n = len(A), len(c)
    big = [list(row) + [F(int(i == k)) for k in range(m)] for i, row in enumerate(A)]
    verts = polytope.vertices(big, list(b))
    return max(sum(ci * v[j] for j, ci in enumerate(c)) for v in verts)


small = st.fractions(min_value=-3, max_value=3, max_denominator=4)
positive = st.fractions(min_value=F(1, 4), max_value=3, max_denominator=4)


@st.composite
def bounded_lp(draw):
    n = draw(st.integers(1, 3))
    m = draw(st.integers(1, 3))
    A = [[draw(st.fractions(min_value=0, max_value=3, max_denominator=3)) for _ in range(n)]
         for _ in range(m)]
    A.append([F(1)] * n)  # keeps the region bounded
    b = [draw(positive) for _ in range(m + 1)]
    c = [draw(small) for _ in range(n)]
    return A, b, c


@settings(max_examples=60, deadline=None)
@given(bounded_lp())
def test_matches_vertex_enumeration(data):
    A, b, c = data
    lp = RationalLP("max")
    xs = [lp.add_variable() for _ in c]
    for row, rhs in zip(A, b):
        lp.add_constraint(dict(zip(xs, row)), "<=", rhs)
    lp.set_objective(dict(zip(xs, c)))
    sol = solve(lp)
    assert sol.status == OPTIMAL
    assert sol.objective == _vertex_optimum(A, b, c)
    assert verify_certificate(lp, sol)


@st.composite
def any_lp(draw):
    n = draw(st.integers(1, 4))
    m = draw(st.integers(1, 4))
    lp = RationalLP(draw(st.sampled_from(["min", "max"])))
    xs = []
    for _ in range(n):
        kind = draw(st.sampled_from(["nonneg", "free", "boxed"]))
        if kind == "free":
            xs.append(lp.add_variable(lower=None))
        elif kind == "boxed":
            lo = draw(small)
            xs.append(lp.add_variable(lower=lo, upper=lo + draw(positive)))
        else:
            xs.append(lp.add_variable())
    for _ in range(m):
        lp.add_constraint({x: draw(small) for x in xs}, draw(st.sampled_from(["<=", ">=", "="])),
                          draw(small))
    lp.set_objective({x: draw(small) for x in xs})
    return lp


@settings(max_examples=150, deadline=None)
@given(any_lp())
def test_every_outcome_certified(lp):
    sol = solve(lp)
    assert sol.status in (OPTIMAL, INFEASIBLE, UNBOUNDED)
    assert verify_certificate(lp, sol)


@settings(max_examples=40, deadline=None)
@given(any_lp())
def test_deterministic(lp):
    a, b = solve(lp), solve(lp.copy())
    assert (a.status, a.x, a.duals, a.farkas, a.ray, a.pivots) == \
           (b.status, b.x, b.duals, b.farkas, b.ray, b.pivots)


@pytest.mark.skipif("compiled" not in BACKENDS, reason="extension not built")
@settings(max_examples=40, deadline=None)
@given(any_lp())
def test_backends_agree(lp):
    a, b = solve(lp, backend="python"), solve(lp, backend="compiled")
    assert (a.status, a.x, a.duals, a.farkas, a.ray, a.pivots) == \
           (b.status, b.x, b.duals, b.farkas, b.ray, b.pivots)


def test_unknown_backend():
    with pytest.raises(ValueError):
        get_backend("fortran")
