from fractions import Fraction as F

import pytest

from conftest import fixtures, frac, suite
from semistatic.duals import (BoxError, MixtureError, MixtureModel, compute_box, duality_gap,
                              model_sup_calibrated, solve_e1, solve_e2, solve_nature_lp)
from semistatic.market_tree import fixture, reduce_redundant_options
from semistatic.oracle import oracle_e2
from semistatic.primal import solve_primal
from semistatic.stopping import MartingaleMeasure, joint_sup


def test_e1_gap(gap):
    res = solve_e1(gap)
    assert res.value == F(1, 2)
    assert res.h_star == (F(1, 2),)
    assert res.removed == []


def test_e1_zero(zero):
    res = solve_e1(zero)
    assert res.value == 0
    assert joint_sup(zero, res.h_star).value == 0


def test_e1_no_options(single):
    res = solve_e1(single)
    assert res.value == 3 == joint_sup(single, ()).value
    assert res.h_star == ()


def test_e2_gap(gap):
    res = solve_e2(gap)
    assert res.value == F(1, 2)
    mix = res.mixture
    comps = sorted((q.leaf_weights, c, v) for (c, q), v in zip(mix.components, mix.snell_values()))
    assert comps == [(frac(0, 1, 0), F(1, 2), F(1, 3)), (frac("2/3", 0, "1/3"), F(1, 2), F(2, 3))]
    assert mix.barycenter().leaf_weights == frac("1/3", "1/2", "1/6")


def test_e2_bin(binom):
    res = solve_e2(binom)
    assert res.value == F(1, 2)
    assert len(res.mixture.components) == 1
    (c, q), = res.mixture.components
    assert c == 1 and q.leaf_weights == (F(1, 4),) * 4


def test_e2_zero(zero):
    res = solve_e2(zero)
    assert res.value == 0 and res.mixture.is_valid()


@pytest.mark.parametrize("name, value", [("INST_GAP", F(1, 2)), ("INST_BIN", F(1, 2)),
                                         ("INST_ZERO", 0), ("INST_SINGLE", 3)])
def test_nature_fixtures(name, value):
    res = solve_nature_lp(fixture(name))
    assert res.value == value


@pytest.mark.parametrize("name, value", [("INST_GAP", F(1, 3)), ("INST_BIN", F(1, 2)),
                                         ("INST_ZERO", 0)])
def test_model_sup(name, value):
    assert model_sup_calibrated(fixture(name)) == value


@pytest.mark.parametrize("name, expected", [("INST_GAP", (F(1, 2), F(1, 3), F(1, 6))),
                                            ("INST_BIN", (F(1, 2), F(1, 2), 0)),
                                            ("INST_ZERO", (0, 0, 0))])
def test_gap(name, expected):
    assert tuple(duality_gap(fixture(name))) == expected


@pytest.mark.parametrize("inst", fixtures() + suite(40, seed=41))
def test_four_way_equality(inst):
    pi = solve_primal(inst).pi
    assert solve_e1(inst).value == pi
    assert solve_e2(inst).value == pi
    assert solve_nature_lp(inst).value == pi


@pytest.mark.parametrize("inst", fixtures() + suite(30, seed=42))
def test_model_sup_below_price(inst):
    model = model_sup_calibrated(inst)
    assert model <= solve_primal(inst).pi
    assert model <= oracle_e2(inst).value


@pytest.mark.parametrize("inst", fixtures() + suite(30, seed=43))
def test_mixture_invariants(inst):
    mix = solve_e2(inst).mixture
    assert sum(mix.weights) == 1
    assert all(c > 0 for c in mix.weights)
    assert all(x == 0 for x in mix.calibration())
    assert all(q.is_valid() for q in mix.measures)
    assert mix.value() == solve_e2(inst).value


@pytest.mark.parametrize("inst", fixtures() + suite(30, seed=44))
def test_monotone_convergence(inst):
    e1, e2 = solve_e1(inst), solve_e2(inst)
    ub = e1.cut_model.upper_bounds
    assert all(a >= b for a, b in zip(ub, ub[1:]))
    lb = e1.cut_model.lower_bounds
    assert all(a <= b for a, b in zip(lb, lb[1:]))
    mv = e2.master_values
    assert all(a <= b for a, b in zip(mv, mv[1:]))
    assert mv[-1] == e2.value


@pytest.mark.parametrize("inst", fixtures() + suite(30, seed=45))
def test_cut_model_consistent(inst):
    assert solve_e1(inst).cut_model.consistent()


@pytest.mark.parametrize("inst", fixtures() + suite(30, seed=46))
def test_weak_duality(inst):
    """Every mixture value minus h-penalty stays below phi(h) at every queried h."""
    red, _ = reduce_redundant_options(inst)
    mix = solve_e2(inst).mixture
    comps = [(c, q.on(red), v) for (c, q), v in zip(mix.components, mix.snell_values())]
    for cut in solve_e1(inst).cut_model.cuts:
        lhs = F(0)
        for c, q, v in comps:
            gamma = q.expect_g()
            lhs += c * (v - sum((a * g for a, g in zip(cut.h, gamma)), F(0)))
        assert lhs <= cut.value


def test_box_needs_reduction(binom):
    with pytest.raises(BoxError):
        compute_box(binom)
    red, _ = reduce_redundant_options(binom)
    assert compute_box(red).R == 0


def test_box_gap(gap):
    box = compute_box(gap)
    assert box.r > 0 and box.R == 3 * box.L / box.r
    assert all(abs(x) < box.R for x in solve_e1(gap).h_star)


def test_redundant_option_expanded(gap):
    inst = gap.add_option(lambda n: n.S[0] - 2)
    res = solve_e1(inst)
    assert res.removed == [1]
    assert len(res.h_star) == 2 and res.h_star[1] == 0
    assert res.value == F(1, 2)
    e2 = solve_e2(inst)
    assert e2.value == F(1, 2) and e2.mixture.is_valid()


def test_invalid_mixture(gap):
    bad = MixtureModel(((F(1), MartingaleMeasure(gap, frac(0, 1, 0))),))
    assert not bad.is_valid()
    with pytest.raises(MixtureError):
        bad.validate()
    with pytest.raises(MixtureError):
        MixtureModel(((F(1, 2), MartingaleMeasure(gap, frac("1/3", "1/2", "1/6"))),)).validate()
