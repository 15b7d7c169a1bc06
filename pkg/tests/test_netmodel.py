import itertools

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from twounicast import fixtures, oracle
from twounicast.netmodel import (
    NetworkError,
    ParseError,
    check_path,
    disjoint_pair,
    extend_network,
    find_disjoint_paths,
    induced_subnetwork,
    iter_paths,
    parse_network,
    path_concat,
    path_slice,
    prune,
    reachable,
    serialize_network,
    validate,
)
from twounicast.randnet import random_network

seeds = st.integers(0, 10**6)
small_nets = seeds.map(lambda s: random_network(s, max_nodes=12))

PAR_WITH_ISOLATED = fixtures.PAR.replace("node b 2", "node b 2\nnode x 2")


def test_par_parses_to_six_nodes_four_edges():
    net = fixtures.load("par")
    assert len(net.nodes) == 6 and len(net.edges) == 4
    assert all(g == 1.0 for g in net.edges.values())


def test_zero_gain_rejected_with_line_number():
    text = fixtures.PAR.replace("edge s1 a 1", "edge s1 a 0")
    with pytest.raises(ParseError, match="nonzero gain") as e:
        parse_network(text)
    assert "line" in str(e.value)


@pytest.mark.parametrize(
    "text, needle",
    [
        ("layers 3\nnode s1 1\nbogus\n", "unknown directive"),
        ("layers 3\nnode s1 1\nnode s2 1\nnode d1 3\nnode d2 3\nedge s1 d1 1\npairs s1 d1 s2 d2\n",
         "consecutive layers"),
    ],
)
def test_parse_errors(text, needle):
    with pytest.raises(ParseError, match=needle):
        parse_network(text)


def test_rand_gains_follow_declared_seed():
    a, b = fixtures.load("bottle"), fixtures.load("bottle")
    assert a.edges == b.edges
    c = parse_network(fixtures.BOTTLE.replace("seed 7", "seed 8"))
    assert c.edges != a.edges


def test_validate_par_and_bottle():
    for name in ("par", "bottle"):
        rep = validate(fixtures.load(name))
        assert rep.valid and not rep.off_path


def test_isolated_node_is_pruned_with_warning():
    rep = validate(parse_network(PAR_WITH_ISOLATED))
    assert rep.off_path == ["x"]
    assert "x" not in rep.pruned and rep.warnings


def test_reachability_examples():
    par, net222 = fixtures.load("par"), fixtures.load("222")
    assert reachable(par, "s1", "d1")
    assert not reachable(par, "s1", "d2")
    assert reachable(net222, "s1", "d2")


def test_induced_subnetwork():
    par = fixtures.load("par")
    assert induced_subnetwork(par, par.nodes) == par
    net = fixtures.load("222")
    sub = induced_subnetwork(net, set(net.nodes) - {"u2"})
    assert "u2" not in sub and sub.reaches("s2", "d1")
    with pytest.raises(NetworkError):
        induced_subnetwork(net, ["s1", "u1", "d1"])


def test_disjoint_path_examples():
    ends = (("s1", "s2"), ("d1", "d2"))
    assert find_disjoint_paths(fixtures.load("par"), *ends) == (("s1", "a", "d1"), ("s2", "b", "d2"))
    assert find_disjoint_paths(fixtures.load("bottle"), *ends) is None
    p, q = find_disjoint_paths(fixtures.load("222"), *ends)
    assert not set(p) & set(q)


def test_path_slice_and_concat():
    assert path_slice(("s1", "a", "d1"), "a", "d1") == ("a", "d1")
    assert path_concat(("s1", "a"), ("a", "d1")) == ("s1", "a", "d1")


def test_check_path_rejects_non_edges():
    with pytest.raises(NetworkError):
        check_path(fixtures.load("par"), ("s1", "b", "d2"))


def test_extension_of_par_doubles_layers():
    ext = extend_network(fixtures.load("par"))
    assert ext.network.r == 6
    copy_edges = [e for e in ext.network.edges if ext.origin[e[0]] == ext.origin[e[1]]]
    assert len(copy_edges) == 6 and len(ext.network.edges) == 10


def test_bottle_extension_copy_edge_is_a_cut():
    ext = extend_network(fixtures.load("bottle"))
    g = nx.DiGraph(list(ext.network.edges))
    g.remove_edge("m", "m'")
    assert not any(nx.has_path(g, s, d) for s in ("s1", "s2") for d in ("d1'", "d2'"))


def _edge_disjoint_count(ext, srcs, dsts):
    g = nx.DiGraph()
    g.add_edges_from(ext.network.edges, capacity=1)
    for s in srcs:
        g.add_edge("SRC", s, capacity=1)
    for d in dsts:
        g.add_edge(ext.copy_of[d], "SNK", capacity=1)
    return nx.maximum_flow_value(g, "SRC", "SNK")


def _vertex_disjoint_count(net, srcs, dsts):
    """Largest number of pairwise vertex-disjoint paths with distinct ends, by enumeration."""
    paths = [p for s in srcs for d in dsts for p in oracle.paths(net, s, d)]
    best = 0
    for k in range(1, min(len(srcs), len(dsts)) + 1):
        for combo in itertools.combinations(paths, k):
            if all(not set(a) & set(b) for a, b in itertools.combinations(combo, 2)):
                best = k
                break
    return best


@pytest.mark.parametrize("name", ["222", "par", "bottle", "z"])
def test_extension_edge_cuts_match_vertex_disjointness(name):
    net = fixtures.load(name)
    ext = extend_network(net)
    for srcs in (("s1",), ("s2",), ("s1", "s2")):
        for dsts in (("d1",), ("d2",), ("d1", "d2")):
            assert _edge_disjoint_count(ext, srcs, dsts) == _vertex_disjoint_count(net, srcs, dsts)


@given(small_nets)
def test_round_trip(net):
    again = parse_network(serialize_network(net))
    assert again == net
    assert parse_network(serialize_network(again)) == again


@given(small_nets)
def test_paths_strictly_increase_in_layer(net):
    for p in itertools.islice(iter_paths(net, net.s1, net.d1), 50):
        assert all(net.layer[b] == net.layer[a] + 1 for a, b in zip(p, p[1:]))


@given(small_nets)
def test_reachability_matches_oracle(net):
    for u, v in itertools.product(net.nodes, repeat=2):
        assert net.reaches(u, v) == oracle.reach(net, u, v)


@given(small_nets)
def test_disjoint_pair_matches_oracle(net):
    for ends in (((net.s1, net.d1), (net.s2, net.d2)), ((net.s1, net.d2), (net.s2, net.d1))):
        got = disjoint_pair(net, *ends)
        assert (got is not None) == oracle.has_disjoint_pair(net, *ends)
        if got is not None:
            assert not set(got[0]) & set(got[1])


@given(small_nets)
def test_prune_idempotent_and_swap_involution(net):
    assert prune(prune(net)) == prune(net)
    assert net.swapped().swapped() == net
