"""Effective gains between layers, condensed networks and a randomized test
for gain polynomials that vanish identically.

Every relay that is not in a key layer simply forwards what it receives, so
the gain seen between two nodes is the sum over connecting paths of the
product of edge gains (times the scale factors of any scaling relays on the
way).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .netmodel import LayeredNetwork, NetworkError

NONZERO_TOL = 1e-9
REDRAWS = 8


def _allowed_set(net: LayeredNetwork, forwarders: Iterable[str] | None) -> set:
    return set(net.nodes) if forwarders is None else set(forwarders)


def gains_from(
    net: LayeredNetwork,
    u: str,
    forwarders: Iterable[str] | None = None,
    scales: Mapping[str, float] | None = None,
    absolute: bool = False,
) -> dict:
    """Effective gain from ``u`` to every later node.

    Intermediate nodes must be in ``forwarders`` and multiply what they pass
    on by ``scales[node]`` (default 1).  The end node's own scale is not
    applied.  With ``absolute`` every gain and scale is replaced by its
    magnitude, which gives the monomial scale used by the tolerance tests.
    """
    ok = _allowed_set(net, forwarders)
    scales = scales or {}
    f = (lambda g: abs(g)) if absolute else (lambda g: g)
    recv = {u: 1.0}
    out = {}
    for layer in range(net.layer[u], net.r + 1):
        for v in net.layers[layer - 1]:
            if v not in recv:
                continue
            val = recv[v]
            out[v] = val
            if v != u and v not in ok:
                continue
            tx = val if v == u else val * f(scales.get(v, 1.0))
            if tx == 0.0:
                continue
            for w in net.succ[v]:
                recv[w] = recv.get(w, 0.0) + f(net.edges[(v, w)]) * tx
    return out


def effective_gain(
    net: LayeredNetwork,
    forwarders: Iterable[str] | None,
    u: str,
    v: str,
    scales: Mapping[str, float] | None = None,
) -> float:
    """ĥ(u, v) with every intermediate node of ``forwarders`` relaying."""
    net._check(u)
    net._check(v)
    if net.layer[v] < net.layer[u] or (net.layer[v] == net.layer[u] and u != v):
        raise NetworkError(f"{u} and {v} are not layer-ordered")
    if u == v:
        return 1.0
    return gains_from(net, u, forwarders, scales).get(v, 0.0)


def layer_matrices(net: LayeredNetwork) -> list[np.ndarray]:
    """H_j with H_j[b, a] = gain of edge (V_j[a], V_{j+1}[b])."""
    mats = []
    for a_ids, b_ids in zip(net.layers, net.layers[1:]):
        H = np.zeros((len(b_ids), len(a_ids)))
        for ia, a in enumerate(a_ids):
            for ib, b in enumerate(b_ids):
                H[ib, ia] = net.gain(a, b)
        mats.append(H)
    return mats


def chained_gain(net: LayeredNetwork, u: str, v: str) -> float:
    """ĥ(u, v) as an entry of the product of per-layer gain matrices."""
    lu, lv = net.layer[u], net.layer[v]
    if lv < lu:
        raise NetworkError(f"{u} and {v} are not layer-ordered")
    mats = layer_matrices(net)
    M = np.eye(len(net.layers[lu - 1]))
    for j in range(lu - 1, lv - 1):
        M = mats[j] @ M
    return float(M[net.layers[lv - 1].index(v), net.layers[lu - 1].index(u)])


# -- transfer matrices ---------------------------------------------------------------
@dataclass(frozen=True)
class TransferMatrix:
    """entries[i, j] is the coefficient from cols[j] to rows[i]."""

    rows: tuple
    cols: tuple
    entries: np.ndarray

    def __getitem__(self, key):
        r, c = key
        return float(self.entries[self.rows.index(r), self.cols.index(c)])

    @property
    def frobenius(self) -> float:
        return float(np.linalg.norm(self.entries))

    def off_diagonal(self) -> float:
        """Largest off-diagonal magnitude (square matrices)."""
        E = self.entries
        mask = ~np.eye(E.shape[0], E.shape[1], dtype=bool)
        return float(np.max(np.abs(E[mask]))) if mask.any() else 0.0

    def diagonal(self) -> np.ndarray:
        return np.diag(self.entries).copy()


def transfer_matrix(
    net: LayeredNetwork,
    srcs: Sequence[str],
    dsts: Sequence[str],
    forwarders: Iterable[str] | None = None,
    scales: Mapping[str, float] | None = None,
) -> TransferMatrix:
    E = np.zeros((len(dsts), len(srcs)))
    for j, s in enumerate(srcs):
        g = gains_from(net, s, forwarders, scales)
        for i, d in enumerate(dsts):
            E[i, j] = g.get(d, 0.0) if d != s else 1.0
    return TransferMatrix(tuple(dsts), tuple(srcs), E)


# -- condensed networks ----------------------------------------------------------------
@dataclass(frozen=True)
class CondensedNetwork:
    """Sources, up to two key layers and destinations.

    ``eff_gain`` holds ĥ for consecutive condensed layers.  ``noise_cov[k]``
    is the covariance of the effective noise at condensed layer k (k ≥ 1) in
    the node order of ``layers[k]``: each node's own unit noise plus the
    noise of every forwarding relay in between, carried by its gain.
    """

    net: LayeredNetwork
    layers: tuple
    eff_gain: dict
    noise_cov: dict
    origin: tuple  # original layer index of each condensed layer
    forwarders: frozenset = field(default_factory=frozenset)

    def h(self, u: str, v: str) -> float:
        return self.eff_gain.get((u, v), 0.0)

    def key_nodes(self) -> list:
        return [v for layer in self.layers[1:-1] for v in layer]


def build_condensed(
    net: LayeredNetwork,
    key_layers: Sequence[int],
    forwarders: Iterable[str] | None = None,
) -> CondensedNetwork:
    keys = sorted(set(key_layers))
    if len(keys) > 2 or len(keys) != len(key_layers):
        raise NetworkError("at most two distinct key layers")
    for k in keys:
        if not 1 < k < net.r:
            raise NetworkError(f"key layer {k} must lie strictly between 1 and {net.r}")
    ok = _allowed_set(net, forwarders) | set(net.terminals)
    origin = (1, *keys, net.r)
    layers = tuple(tuple(v for v in net.layers[j - 1] if v in ok) for j in origin)
    eff = {}
    cov = {}
    for k in range(1, len(origin)):
        lo, hi = origin[k - 1], origin[k]
        inner = {v for v in ok if lo < net.layer[v] < hi}
        for u in layers[k - 1]:
            g = gains_from(net, u, inner)
            for w in layers[k]:
                if g.get(w, 0.0) != 0.0:
                    eff[(u, w)] = g[w]
        targets = layers[k]
        C = np.eye(len(targets))
        for x in sorted(inner, key=net.index.get):
            g = gains_from(net, x, inner)
            vec = np.array([g.get(w, 0.0) for w in targets])
            C += np.outer(vec, vec)
        cov[k] = C
    return CondensedNetwork(net, layers, eff, cov, origin, frozenset(ok))


# -- generic non-vanishing -------------------------------------------------------------
class GainExpr:
    """Polynomial in the edge gains built from effective gains, products and
    determinants.  ``evaluate`` returns (value, scale) where ``scale`` is the
    same expression with every monomial taken in absolute value."""

    def evaluate(self, net: LayeredNetwork) -> tuple[float, float]:
        raise NotImplementedError

    def __mul__(self, other: "GainExpr") -> "GainExpr":
        return Prod((self, other))


@dataclass(frozen=True)
class Eff(GainExpr):
    u: str
    v: str
    forwarders: frozenset | None = None

    def evaluate(self, net):
        if self.u == self.v:
            return 1.0, 1.0
        val = gains_from(net, self.u, self.forwarders).get(self.v, 0.0)
        scale = gains_from(net, self.u, self.forwarders, absolute=True).get(self.v, 0.0)
        return val, scale


@dataclass(frozen=True)
class Const(GainExpr):
    value: float

    def evaluate(self, net):
        return self.value, abs(self.value)


@dataclass(frozen=True)
class Prod(GainExpr):
    factors: tuple

    def evaluate(self, net):
        val, scale = 1.0, 1.0
        for f in self.factors:
            v, s = f.evaluate(net)
            val *= v
            scale *= s
        return val, scale


@dataclass(frozen=True)
class Det(GainExpr):
    """Determinant of a square matrix of expressions; its scale is the
    permanent of the entry scales."""

    rows: tuple  # tuple of tuples of GainExpr

    def evaluate(self, net):
        vals = np.array([[e.evaluate(net)[0] for e in row] for row in self.rows])
        scales = np.array([[e.evaluate(net)[1] for e in row] for row in self.rows])
        n = len(self.rows)
        perm = sum(np.prod([scales[i, p[i]] for i in range(n)]) for p in permutations(range(n)))
        return float(np.linalg.det(vals)) if n else 1.0, float(perm)


def is_nonzero(value: float, scale: float, tol: float = NONZERO_TOL) -> bool:
    return scale > 0.0 and abs(value) > tol * scale


def generically_nonzero(
    net: LayeredNetwork, expr: GainExpr, k: int = REDRAWS, seed: int = 0
) -> bool:
    """True iff the expression is nonzero for at least one of ``k`` fresh
    generic gain draws on the same topology."""
    rng = np.random.default_rng(seed)
    for _ in range(k):
        if is_nonzero(*expr.evaluate(net.redraw(rng))):
            return True
    return False
