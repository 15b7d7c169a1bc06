from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from twounicast import fixtures, oracle
from twounicast.classifier import (
    C1Witness,
    C2Witness,
    brute_force_classify,
    c1_properties,
    claim1_structures,
    classify_region,
    classify_sum_dof,
    detect_butterfly,
    detect_case_A,
    detect_grail,
    verify_structural_properties,
)
from twounicast.netmodel import LayeredNetwork
from twounicast.randnet import random_network

half = Fraction(1, 2)
small_nets = st.integers(0, 10**6).map(lambda s: random_network(s, max_nodes=12))
any_nets = st.integers(0, 10**6).map(random_network)


@pytest.mark.parametrize(
    "name, case, dof",
    [
        ("par", "B", 2),
        ("bottle", "A", 1),
        ("222", "B", 2),
        ("z", "A'", 1),
        ("ex1", "B", 2),
        ("cond", "B", 2),
        ("c1", "C1", Fraction(3, 2)),
        ("c1-late", "C1", Fraction(3, 2)),
        ("c2", "C2", Fraction(3, 2)),
        ("c2-late", "C2", Fraction(3, 2)),
        ("butterfly", "B'", 2),
        ("grail", "B'", 2),
        ("c2-grail", "B'", 2),
    ],
)
def test_fixture_classification_agrees_with_brute_force(name, case, dof):
    net = fixtures.load(name)
    c = classify_sum_dof(net)
    assert (c.case, c.sum_dof) == (case, dof)
    if len(net.nodes) <= oracle.MAX_NODES:
        ref = brute_force_classify(net)
        assert (ref.case, ref.sum_dof) == (case, dof)


def test_bottle_cut_node():
    w = detect_case_A(fixtures.load("bottle"))
    assert w.variant == "A" and w.node == "m"


def test_z_network_cut_edge():
    w = detect_case_A(fixtures.load("z"))
    assert w.variant == "A'" and w.edge == ("b", "d1")


def test_par_has_no_case_a_butterfly_or_grail():
    net = fixtures.load("par")
    assert detect_case_A(net) is None
    assert detect_butterfly(net) is None
    assert detect_grail(net) is None


def test_bottle_has_no_butterfly():
    assert detect_butterfly(fixtures.load("bottle")) is None


def test_butterfly_fixture_shares_middle_path():
    w = detect_butterfly(fixtures.load("butterfly"))
    assert w is not None and w.shared == ("u",)
    assert set(w.p12) & set(w.shared) == set()


def test_grail_fixtures():
    assert detect_grail(fixtures.load("grail")) is not None
    assert detect_grail(fixtures.load("c2-grail")) is not None


@pytest.mark.parametrize(
    "name, region, corners",
    [
        ("bottle", "I", [(1, 0), (0, 1)]),
        ("par", "II", [(1, 1)]),
        ("c1", "III", [(1, half), (half, 1)]),
        ("c2", "IV", [(1, half)]),
    ],
)
def test_region_examples(name, region, corners):
    reg = classify_region(fixtures.load(name))
    assert reg.region == region
    assert reg.vertices == corners


def test_region_iv_mirrors_to_v():
    reg = classify_region(fixtures.load("c2").swapped())
    assert reg.region == "V" and reg.vertices == [(half, 1)]


def test_c1_structural_properties_hold():
    net = fixtures.load("c1")
    c = classify_sum_dof(net)
    assert isinstance(c.witness, C1Witness)
    rep = verify_structural_properties(net, c)
    assert rep.ok and sorted(rep.results) == [f"P{k}" for k in range(1, 9)]


def test_c1_without_v2_v0_edge_breaks_p4():
    net = fixtures.load("c1")
    w = classify_sum_dof(net).witness
    g = net.swapped() if w.swapped else net
    edges = {e: h for e, h in g.edges.items() if e != (w["v2"], w["v0"])}
    cut = LayeredNetwork(g.layers, edges, g.s1, g.d1, g.s2, g.d2)
    assert not c1_properties(cut, w)["P4"]


def test_c2_structural_properties_hold():
    net = fixtures.load("c2")
    c = classify_sum_dof(net)
    assert isinstance(c.witness, C2Witness)
    rep = verify_structural_properties(net, c)
    assert rep.ok and rep.results["P10"]


def test_structural_properties_reject_other_witnesses():
    with pytest.raises(ValueError):
        verify_structural_properties(fixtures.load("par"), classify_sum_dof(fixtures.load("par")))


@given(any_nets)
def test_sum_dof_values_and_region_consistency(net):
    c = classify_sum_dof(net)
    assert c.sum_dof in {0, 1, Fraction(3, 2), 2}
    reg = classify_region(net, c)
    assert reg.max_sum() == c.sum_dof


@given(any_nets)
def test_sum_dof_invariant_under_pair_swap(net):
    assert classify_sum_dof(net).sum_dof == classify_sum_dof(net.swapped()).sum_dof


@given(small_nets)
def test_claim1_coverage(net):
    if oracle.case_a(net) is None:
        assert any(claim1_structures(net).values())


@given(small_nets)
def test_matches_exhaustive_classifier(net):
    c, ref = classify_sum_dof(net, fallback=False), brute_force_classify(net)
    assert (c.case, c.sum_dof) == (ref.case, ref.sum_dof)
    if c.case in ("C1", "C2"):
        assert verify_structural_properties(net, c).ok
