import pytest
from hypothesis import given, strategies as st

from twounicast import fixtures, oracle
from twounicast.classifier import classify_sum_dof
from twounicast.interference import (
    InvariantViolation,
    check_witness,
    find_key_node,
    find_manageable_subset,
    interference_profile,
    is_manageable,
    key_node_witnesses,
)
from twounicast.randnet import random_network

EX1_P11 = ("s1", "v1", "v2", "v3", "d1")
EX1_P22 = ("s2", "v7", "v8", "v9", "d2")

small_nets = st.integers(0, 10**6).map(lambda s: random_network(s, max_nodes=12))


@pytest.mark.parametrize(
    "subset, counts",
    [
        (None, (2, 1, 1, 0)),
        ("no_v6", (2, 0, 1, 0)),
        ("paths", (1, 0, 1, 0)),
    ],
)
def test_example_network_counts(subset, counts):
    net = fixtures.load("ex1")
    S = {
        None: None,
        "no_v6": set(net.nodes) - {"v6"},
        "paths": set(EX1_P11) | set(EX1_P22),
    }[subset]
    prof = interference_profile(net, S, EX1_P11, EX1_P22)
    assert (prof.n1, prof.n2, prof.n1_direct, prof.n2_direct) == counts


def test_example_network_manageable_without_v6():
    net = fixtures.load("ex1")
    S = find_manageable_subset(net, EX1_P11, EX1_P22)
    assert S is not None and "v6" not in S
    prof = interference_profile(net, S, EX1_P11, EX1_P22)
    assert (prof.n1, prof.n2) == (2, 0)


def test_222_counts_both_two():
    prof = interference_profile(fixtures.load("222"), None, ("s1", "u1", "d1"), ("s2", "u2", "d2"))
    assert (prof.n1, prof.n2) == (2, 2)


def test_par_subset_is_the_two_paths():
    S = find_manageable_subset(fixtures.load("par"), ("s1", "a", "d1"), ("s2", "b", "d2"))
    assert S == frozenset({"s1", "a", "d1", "s2", "b", "d2"})


def test_c1_manageable_only_one_pair_at_a_time():
    net = fixtures.load("c1")
    w = classify_sum_dof(net).witness
    assert find_manageable_subset(net, w.p11, w.p22, "both") is None
    assert find_manageable_subset(net, w.p11, w.p22, "pair1-only") is not None
    assert find_manageable_subset(net, w.p11, w.p22, "pair2-only") is not None


def test_key_node_222():
    net = fixtures.load("222")
    key = find_key_node(net, None, ("s1", "u1", "d1"), 1)
    assert key.node == "d1" and key.input_layer == 2
    (p1, p2), reached = key_node_witnesses(net, None, key)
    assert p1[0] == "s1" and p2[0] == "s2" and p1[-1] == p2[-1] == "d1"
    assert set(p1) & set(p2) == {"d1"}
    assert reached == ["u1", "u2"]


def test_key_node_absent_without_cross_path():
    assert find_key_node(fixtures.load("par"), None, ("s1", "a", "d1"), 1) is None


def test_bottle_has_no_key_regime():
    net = fixtures.load("bottle")
    key = find_key_node(net, None, ("s1", "m", "d1"), 1)
    with pytest.raises(InvariantViolation):
        key_node_witnesses(net, None, key)


def test_example_network_key_node_reaches_two_inputs():
    net = fixtures.load("ex1")
    key = find_key_node(net, None, EX1_P11, 1)
    _, reached = key_node_witnesses(net, None, key)
    assert len(reached) >= 2


def _pairs(net, cap=20):
    return oracle.disjoint_path_pairs(net, (net.s1, net.d1), (net.s2, net.d2))[:cap]


@given(small_nets)
def test_counts_match_oracle(net):
    for p11, p22 in _pairs(net):
        prof = interference_profile(net, None, p11, p22)
        for i in (1, 2):
            assert prof.n(i) == len(oracle.interferers(net, net.nodes, p11, p22, i))
            assert prof.n_direct(i) == len(oracle.direct_interferers(net, p11, p22, i))


@given(small_nets)
def test_every_witness_revalidates(net):
    for p11, p22 in _pairs(net, 5):
        prof = interference_profile(net, None, p11, p22)
        for i, ws in prof.witnesses.items():
            for w in ws:
                assert check_witness(net, net.nodes, p11, p22, i, w)


@given(small_nets)
def test_manageability_matches_subset_oracle(net):
    for p11, p22 in _pairs(net, 10):
        for mode in ("both", "pair1-only", "pair2-only"):
            assert is_manageable(net, p11, p22, mode) == oracle.manageable(net, p11, p22, mode)
