import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twounicast import fixtures, oracle
from twounicast.condense import (
    Det,
    Eff,
    build_condensed,
    chained_gain,
    effective_gain,
    generically_nonzero,
    transfer_matrix,
)
from twounicast.fixtures import cond_gain
from twounicast.netmodel import NetworkError
from twounicast.randnet import random_network

small_nets = st.integers(0, 10**6).map(lambda s: random_network(s, max_nodes=12))


def _h(net, i):
    return cond_gain(net, i)


def test_cond_identities():
    net = fixtures.load("cond")
    want = _h(net, 2) * _h(net, 7) + _h(net, 3) * _h(net, 8)
    assert math.isclose(effective_gain(net, None, "s2", "v3"), want, rel_tol=1e-12)
    assert effective_gain(net, None, "v2", "d2") == 0.0


def test_unit_chain_gain():
    assert effective_gain(fixtures.load("par"), None, "s1", "d1") == 1.0


def test_effective_gain_rejects_reversed_pairs():
    with pytest.raises(NetworkError):
        effective_gain(fixtures.load("par"), None, "d1", "s1")


def test_cond_condenses_to_three_layers():
    c = build_condensed(fixtures.load("cond"), [3])
    assert c.layers == (("s1", "s2"), ("v1", "v2", "v3"), ("d1", "d2"))
    assert c.h("v2", "d2") == 0.0 and c.h("v2", "d1") != 0.0
    assert c.h("s1", "v1") == 0.0


def test_222_condensation_is_identity():
    net = fixtures.load("222")
    c = build_condensed(net, [2])
    assert c.layers == net.layers
    assert c.eff_gain == dict(net.edges)
    for k in (1, 2):
        assert np.array_equal(c.noise_cov[k], np.eye(2))


def test_key_layers_must_be_interior():
    with pytest.raises(NetworkError):
        build_condensed(fixtures.load("222"), [1])


def test_c1_condensation_matches_reachability():
    net = fixtures.load("c1")
    L = net.layer["v2"]
    c = build_condensed(net, [L])
    for k in (1, 2):
        for u in c.layers[k - 1]:
            for v in c.layers[k]:
                assert (c.h(u, v) != 0.0) == net.reaches(u, v)


def test_generic_nonzero_examples():
    n222 = fixtures.load("222")
    det = Det(((Eff("s1", "u1"), Eff("s2", "u1")), (Eff("s1", "u2"), Eff("s2", "u2"))))
    assert generically_nonzero(n222, det)
    assert not generically_nonzero(fixtures.load("par"), Eff("s1", "d2"))
    assert not generically_nonzero(fixtures.load("cond"), Eff("v2", "d2"))


def test_transfer_matrix_of_222_relays():
    net = fixtures.load("222")
    T = transfer_matrix(net, ("s1", "s2"), ("u1", "u2"))
    assert T["u1", "s2"] == net.edges[("s2", "u1")]


def _path_sum(net, u, v, allowed=None):
    return math.fsum(
        math.prod(net.edges[e] for e in zip(p, p[1:])) for p in oracle.paths(net, u, v, allowed=allowed)
    )


@given(small_nets)
def test_effective_gain_is_the_path_sum(net):
    for u in net.nodes:
        for v in net.nodes:
            if net.layer[v] > net.layer[u]:
                got = effective_gain(net, None, u, v)
                assert math.isclose(got, _path_sum(net, u, v), rel_tol=1e-12, abs_tol=1e-12)
                assert math.isclose(got, chained_gain(net, u, v), rel_tol=1e-9, abs_tol=1e-12)


@given(small_nets, st.integers(0, 2**32 - 1))
def test_forwarder_restriction_is_the_induced_path_sum(net, seed):
    rng = np.random.default_rng(seed)
    inner = [v for v in net.nodes if v not in net.terminals]
    fw = {v for v in inner if rng.random() < 0.6}
    allowed = fw | set(net.terminals)
    got = effective_gain(net, fw, net.s1, net.d1)
    assert math.isclose(got, _path_sum(net, net.s1, net.d1, allowed), rel_tol=1e-12, abs_tol=1e-12)


@given(small_nets)
def test_noise_covariance_is_psd_with_unit_floor(net):
    if net.r < 3:
        return
    c = build_condensed(net, [2])
    for C in c.noise_cov.values():
        assert np.allclose(C, C.T)
        assert np.all(np.diag(C) >= 1.0)
        assert np.linalg.eigvalsh(C).min() >= 1.0 - 1e-9
