import json
import random
from fractions import Fraction as F

import pytest

from conftest import fixtures, suite
from semistatic.market_tree import (InstanceError, Node, build_tree, check_no_arbitrage,
                                    dumps_instance, fixture, instance_from_dict,
                                    instance_to_dict, is_replicable, load_instance,
                                    positive_calibrated_measure, reduce_redundant_options)
from semistatic.oracle import enumerate_martingale_vertices
from semistatic.primal import solve_primal
from semistatic.rational import parse_rational


def test_parse_rational():
    assert parse_rational("3/6") == F(1, 2)
    assert parse_rational("-2") == -2
    assert parse_rational(4) == 4
    for bad in (0.5, True, "1/0", "x"):
        with pytest.raises((ValueError, TypeError, ZeroDivisionError)):
            parse_rational(bad)


def test_bin_fixture(binom):
    assert (binom.horizon, len(binom.nodes), binom.option_count) == (2, 7, 1)
    assert len(binom.leaves) == 4


def test_single_and_gap_fixtures(single, gap):
    assert len(single.nodes) == 3 and single.option_count == 0
    assert len(gap.nodes) == 4 and gap.phi(gap.root) == F(1, 3)


def test_bin_unique_measure(binom):
    verts = enumerate_martingale_vertices(binom)
    assert [v.leaf_weights for v in verts] == [(F(1, 4),) * 4]


def test_unknown_fixture():
    with pytest.raises(KeyError):
        fixture("INST_NOPE")


@pytest.mark.parametrize("inst", fixtures() + suite(10, seed=3))
def test_round_trip(inst):
    again = load_instance(dumps_instance(inst))
    assert again == inst
    assert instance_to_dict(again) == instance_to_dict(inst)


def _raw(binom):
    return instance_to_dict(binom)


def test_time_jump_rejected(binom):
    data = _raw(binom)
    data["nodes"][3]["time"] = 2
    data["nodes"][3]["parent"] = "r"
    with pytest.raises(InstanceError, match="time"):
        instance_from_dict(data)


def test_short_g_rejected(binom):
    data = _raw(binom)
    data["nodes"][-1]["g"] = []
    with pytest.raises(InstanceError, match="g has length"):
        instance_from_dict(data)


@pytest.mark.parametrize("mutate, message", [
    (lambda d: d["nodes"].append(dict(d["nodes"][0])), "duplicate"),
    (lambda d: d["nodes"][1].update(parent="zz"), "orphan"),
    (lambda d: d["nodes"][1].update(S=["1", "2"]), "S has length"),
    (lambda d: d["nodes"][0].update(g=["0"]), "non-leaf"),
    (lambda d: d.update(nodes=d["nodes"][:-2]), "leaf"),
    (lambda d: d.pop("horizon"), "malformed"),
])
def test_structural_errors(binom, mutate, message):
    data = _raw(binom)
    mutate(data)
    with pytest.raises(InstanceError, match=message):
        instance_from_dict(data)


def test_float_rejected(binom):
    text = dumps_instance(binom).replace('"phi": "1"', '"phi": 1.0', 1)
    with pytest.raises((InstanceError, TypeError, ValueError)):
        load_instance(text)


def test_bad_json():
    with pytest.raises(InstanceError):
        load_instance("{not json")


def test_na_bin(binom):
    rep = check_no_arbitrage(binom)
    assert rep.na_ok and rep.ftap_consistent
    q = [F(x) for x in rep.certificate["measure"]]
    assert all(w > 0 for w in q)


def test_na_gap(gap):
    rep = check_no_arbitrage(gap)
    assert rep.na_ok
    assert rep.redundant_option_indices == []
    # the unique calibrated measure
    assert positive_calibrated_measure(gap) == (F(1, 3), F(1, 2), F(1, 6))


def test_riskless_profit_detected(single):
    inst = single.add_option(lambda n: 1)
    rep = check_no_arbitrage(inst)
    assert not rep.na_ok and rep.ftap_consistent
    cert = rep.certificate
    assert F(cert["h"][0]) >= 1
    assert all(F(x) >= 0 for x in cert["gains"].values())
    # stock never moves on this path, so stock holdings are irrelevant
    assert set(cert["gains"].values()) == {cert["h"][0]}


def test_stock_arbitrage_detected():
    # both children above the root price
    inst = build_tree(1, {"r": (None, 1, 0), "a": ("r", 2, 0, ()), "b": ("r", 3, 0, ())}, 0)
    rep = check_no_arbitrage(inst)
    assert not rep.na_ok and rep.ftap_consistent


@pytest.mark.parametrize("inst", suite(40, seed=11))
def test_characterizations_agree(inst):
    rep = check_no_arbitrage(inst)
    assert rep.ftap_consistent
    assert rep.na_ok


def test_characterizations_agree_on_mispriced():
    rng = random.Random(5)
    seen = {True: 0, False: 0}
    for inst in suite(30, seed=12):
        if not inst.option_count:
            continue
        shift = F(rng.randint(-4, 4), 2)
        bumped = instance_from_dict(instance_to_dict(inst))
        nodes = tuple(Node(n.id, n.time, n.parent, n.S, n.phi,
                           None if n.g is None else (n.g[0] + shift,) + n.g[1:])
                      for n in bumped.nodes)
        bumped = type(inst)(inst.horizon, inst.stock_dim, inst.option_count, nodes)
        rep = check_no_arbitrage(bumped)
        assert rep.ftap_consistent
        seen[rep.na_ok] += 1
    assert seen[False] > 0


def test_forward_is_redundant(binom):
    inst = binom.add_option(lambda n: n.S[0] - 2)
    red, removed = reduce_redundant_options(inst)
    assert 1 in removed


def test_gap_nothing_removed(gap):
    red, removed = reduce_redundant_options(gap)
    assert removed == [] and red == gap


def test_no_options_identity(single):
    red, removed = reduce_redundant_options(single)
    assert red is single and removed == []


@pytest.mark.parametrize("inst", suite(25, seed=13) + fixtures())
def test_reduction_leaves_nothing_replicable(inst):
    red, _ = reduce_redundant_options(inst)
    for k in range(red.option_count):
        assert not is_replicable(red, k, [j for j in range(red.option_count) if j != k])


@pytest.mark.parametrize("inst", suite(15, seed=14) + [fixture("INST_BIN").add_option(lambda n: n.S[0] - 2)])
def test_price_invariant_under_reduction(inst):
    red, _ = reduce_redundant_options(inst)
    assert solve_primal(red).pi == solve_primal(inst).pi


def test_serialized_rationals_are_strings(gap):
    data = json.loads(dumps_instance(gap))
    assert data["nodes"][0]["phi"] == "1/3"
