import random
from fractions import Fraction as F

import pytest

from conftest import fixtures, suite
from semistatic.exact_lp import OPTIMAL, verify_certificate
from semistatic.market_tree import build_tree, fixture
from semistatic.primal import (SemiStaticStrategy, UnboundedHedgeError, budget_is_infeasible,
                               build_primal_lp, solve_primal, verify_superhedge)

EPS = F(1, 10**6)


def gap_optimizer(gap):
    s = SemiStaticStrategy.zero(gap, F(1, 2))
    s.h = (F(1, 2),)
    s.H["r"] = (F(-2, 3),)
    s.H_post[0]["r"] = (F(-1, 2),)
    return s


def test_gap_lp_shape(gap):
    lp, layout = build_primal_lp(gap)
    assert lp.num_vars == 4
    assert lp.num_constraints == 6
    assert list(layout.H) == ["r"] and list(layout.H_post[0]) == ["r"]


def test_single_lp_shape(single):
    lp, _ = build_primal_lp(single)
    assert lp.num_constraints == 3


def test_gap_price(gap):
    pi, strat = solve_primal(gap)
    assert pi == F(1, 2)
    assert verify_superhedge(gap, strat, pi)
    assert strat.h == (F(1, 2),)
    assert strat.H["r"] == (F(-2, 3),)
    assert F(-1, 2) <= strat.H_post[0]["r"][0] <= 0


@pytest.mark.parametrize("name, value", [("INST_BIN", F(1, 2)), ("INST_ZERO", 0),
                                         ("INST_SINGLE", 3), ("INST_GAP", F(1, 2))])
def test_fixture_prices(name, value):
    assert solve_primal(fixture(name)).pi == value


def test_known_optimizer(gap):
    s = gap_optimizer(gap)
    assert verify_superhedge(gap, s, F(1, 2))
    assert not verify_superhedge(gap, s, F(1, 2) - F(1, 1000))
    for post in (F(0), F(-1, 4)):
        s.H_post[0]["r"] = (post,)
        assert verify_superhedge(gap, s, F(1, 2))


@pytest.mark.parametrize("inst", fixtures() + suite(10, seed=31))
def test_cash_dominates(inst):
    top = max(n.phi for n in inst.nodes)
    assert verify_superhedge(inst, SemiStaticStrategy.zero(inst), top)


@pytest.mark.parametrize("inst", fixtures() + suite(30, seed=32))
def test_attainment_and_tightness(inst):
    res = solve_primal(inst)
    assert verify_certificate(res.lp, res.solution)
    assert verify_superhedge(inst, res.strategy, res.pi)
    infeasible, sol, lp = budget_is_infeasible(inst, res.pi - EPS)
    assert infeasible
    feasible, sol, _ = budget_is_infeasible(inst, res.pi)
    assert not feasible and sol.status == OPTIMAL


@pytest.mark.parametrize("inst", fixtures() + suite(20, seed=33))
def test_translation(inst):
    pi = solve_primal(inst).pi
    for kappa in (F(3, 2), F(-1, 3)):
        assert solve_primal(inst.with_phi(lambda n: n.phi + kappa)).pi == pi + kappa


@pytest.mark.parametrize("inst", fixtures() + suite(20, seed=34))
def test_homogeneity(inst):
    pi = solve_primal(inst).pi
    for lam in (F(2), F(1, 3)):
        assert solve_primal(inst.with_phi(lambda n: lam * n.phi)).pi == lam * pi


def test_single_path_equals_max():
    rng = random.Random(4)
    for _ in range(10):
        T = rng.randint(1, 4)
        spec = {"n0": (None, 5, F(rng.randint(0, 9), 2))}
        for t in range(1, T + 1):
            spec[f"n{t}"] = (f"n{t-1}", 5, F(rng.randint(0, 9), 2)) + (((),) if t == T else ())
        inst = build_tree(T, spec, 0)
        assert solve_primal(inst).pi == max(n.phi for n in inst.nodes)


def test_arbitrage_is_unbounded():
    inst = build_tree(1, {"r": (None, 1, 0), "a": ("r", 2, 0, ()), "b": ("r", 3, 0, ())}, 0)
    with pytest.raises(UnboundedHedgeError):
        solve_primal(inst)


def test_strategy_serializes(gap):
    d = solve_primal(gap).strategy.to_dict()
    assert d["x"] == "1/2" and d["h"] == ["1/2"]
