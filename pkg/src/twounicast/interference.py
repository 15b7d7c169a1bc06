"""Interference counts on a pair of disjoint paths, manageability search and
key-node extraction.

Node sets are bitmasks over ``net.index`` internally; the public functions
accept and return plain collections of node ids.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .netmodel import LayeredNetwork, NetworkError, Path, disjoint_flow_paths, iter_paths

log = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 18  # complement size up to which subset search is exhaustive


class InvariantViolation(RuntimeError):
    """A witness that must exist under the stated preconditions was not found."""


@dataclass(frozen=True)
class InterfererWitness:
    interferer: str
    target_edge: tuple[str, str]
    feeder_path: Path
    direct: bool


@dataclass(frozen=True)
class InterferenceProfile:
    n1: int
    n2: int
    n1_direct: int
    n2_direct: int
    witnesses: dict = field(default_factory=dict)  # i -> list[InterfererWitness]
    subset: frozenset = frozenset()

    def n(self, i: int) -> int:
        return self.n1 if i == 1 else self.n2

    def n_direct(self, i: int) -> int:
        return self.n1_direct if i == 1 else self.n2_direct


@dataclass(frozen=True)
class KeyNode:
    node: str
    pair_index: int
    input_layer: int


def _paths(p11: Sequence[str], p22: Sequence[str], i: int):
    return (p11, p22) if i == 1 else (p22, p11)


def _in_neighbors(net: LayeredNetwork, target: int) -> int:
    m = 0
    for v in net.members(target):
        m |= net.in_mask(v)
    return m & ~target


def interferer_mask(net: LayeredNetwork, S: int, target: int, i: int) -> int:
    """Nodes of S with an edge into ``target`` (the pair-i path) that are
    reachable from the other source inside S minus the target path."""
    other = net.bit(net.source(3 - i))
    room = S & ~target
    if not room & other:
        return 0
    return net.forward_closure(other, room) & _in_neighbors(net, target) & S


def count(net: LayeredNetwork, S: int, m11: int, m22: int, i: int) -> int:
    target = m11 if i == 1 else m22
    return bin(interferer_mask(net, S, target, i)).count("1")


def direct_count(net: LayeredNetwork, m11: int, m22: int, i: int) -> int:
    target, companion = (m11, m22) if i == 1 else (m22, m11)
    return bin(_in_neighbors(net, target) & companion).count("1")


def _check_pair(net: LayeredNetwork, p11, p22, S: int):
    m11, m22 = net.mask(p11), net.mask(p22)
    if m11 & m22:
        raise NetworkError("paths are not vertex-disjoint")
    if (m11 | m22) & ~S:
        raise NetworkError("paths must lie inside the subset")
    return m11, m22


def _feeder(net: LayeredNetwork, start: str, goal: str, allowed: int, prefer: Sequence[str]):
    if goal in prefer:
        return tuple(prefer[: list(prefer).index(goal) + 1])
    return next(iter_paths(net, start, goal, allowed, limit=1))


def interference_profile(net: LayeredNetwork, S: Iterable[str] | None, p11: Path, p22: Path):
    Sm = net.full_mask if S is None else net.mask(S)
    m11, m22 = _check_pair(net, p11, p22, Sm)
    counts, directs, wits = {}, {}, {}
    for i in (1, 2):
        target_path, companion = _paths(p11, p22, i)
        target = net.mask(target_path)
        found = interferer_mask(net, Sm, target, i)
        room = Sm & ~target
        lst = []
        for v in sorted(net.members(found), key=net.index.get):
            head = next(w for w in net.succ[v] if target & net.bit(w))
            feeder = _feeder(net, net.source(3 - i), v, room, companion)
            lst.append(InterfererWitness(v, (v, head), feeder, v in companion))
        counts[i] = len(lst)
        directs[i] = direct_count(net, m11, m22, i)
        wits[i] = lst
    return InterferenceProfile(
        counts[1], counts[2], directs[1], directs[2], wits, frozenset(net.members(Sm))
    )


def check_witness(net: LayeredNetwork, S: Iterable[str], p11, p22, i: int, w: InterfererWitness) -> bool:
    """Re-validate one witness from the raw definitions."""
    S = set(S)
    target, companion = _paths(p11, p22, i)
    v, (a, b) = w.interferer, w.target_edge
    return (
        v in S
        and v not in target
        and a == v
        and b in target
        and (a, b) in net.edges
        and w.feeder_path[0] == net.source(3 - i)
        and w.feeder_path[-1] == v
        and all(x in S and x not in target for x in w.feeder_path)
        and all(e in net.edges for e in zip(w.feeder_path, w.feeder_path[1:]))
        and w.direct == (v in companion)
    )


# -- manageability -------------------------------------------------------------------
def _good(c: int) -> bool:
    return c != 1


def _qualifies(net, S, m11, m22, mode) -> bool:
    if mode == "both":
        return _good(count(net, S, m11, m22, 1)) and _good(count(net, S, m11, m22, 2))
    i = 1 if mode == "pair1-only" else 2
    return _good(count(net, S, m11, m22, i))


def _feeder_masks(net: LayeredNetwork, src: str, v: str, allowed: int) -> list[int]:
    return sorted({net.mask(p) for p in iter_paths(net, src, v, allowed)}, key=lambda m: (bin(m).count("1"), m))


def _one_sided_witness(net: LayeredNetwork, m11: int, m22: int, i: int):
    """Smallest S of the form P ∪ F_a ∪ F_b with n_i(S) ≥ 2 and n_ī(S) = 0.

    Any S with that count pattern contains two pair-i interferers and their
    feeder paths, and n_ī only grows with S, so this family is exhaustive.
    """
    j = 3 - i
    base = m11 | m22
    if direct_count(net, m11, m22, j):
        return None
    target = m11 if i == 1 else m22
    cands = interferer_mask(net, net.full_mask, target, i)
    src = net.source(j)
    room = net.full_mask & ~target
    options = []
    for v in net.members(cands):
        fs = [f for f in _feeder_masks(net, src, v, room) if count(net, base | f, m11, m22, j) == 0]
        if fs:
            options.append((v, fs))
    best = None
    for (va, fa), (vb, fb) in itertools.combinations(options, 2):
        for x in fa:
            for y in fb:
                S = base | x | y
                if count(net, S, m11, m22, j) == 0 and count(net, S, m11, m22, i) >= 2:
                    key = (bin(S).count("1"), S)
                    if best is None or key < best[0]:
                        best = (key, S)
    return None if best is None else best[1]


def manageable_witness(net: LayeredNetwork, m11: int, m22: int, mode: str = "both"):
    """Some qualifying subset mask, or None.  Decides existence exactly."""
    base = m11 | m22
    full = net.full_mask
    if mode in ("pair1-only", "pair2-only"):
        i = 1 if mode == "pair1-only" else 2
        if _good(direct_count(net, m11, m22, i)):
            return base
        return full if count(net, full, m11, m22, i) >= 2 else None
    d1, d2 = direct_count(net, m11, m22, 1), direct_count(net, m11, m22, 2)
    if _good(d1) and _good(d2):
        return base
    if count(net, full, m11, m22, 1) >= 2 and count(net, full, m11, m22, 2) >= 2:
        return full
    for i in (1, 2):
        S = _one_sided_witness(net, m11, m22, i)
        if S is not None:
            return S
    return None


def is_manageable(net: LayeredNetwork, p11: Path, p22: Path, mode: str = "both") -> bool:
    m11, m22 = _check_pair(net, p11, p22, net.full_mask)
    return manageable_witness(net, m11, m22, mode) is not None


def find_manageable_subset(net: LayeredNetwork, p11: Path, p22: Path, mode: str = "both"):
    """Smallest qualifying S ⊇ p11 ∪ p22 (ties broken by sorted node ids), or None.

    ``mode`` is "both", "pair1-only" or "pair2-only".
    """
    if mode not in ("both", "pair1-only", "pair2-only"):
        raise ValueError(f"unknown mode {mode!r}")
    m11, m22 = _check_pair(net, p11, p22, net.full_mask)
    witness = manageable_witness(net, m11, m22, mode)
    if witness is None:
        return None
    base = m11 | m22
    rest = sorted(net.members(net.full_mask & ~base))
    if len(rest) > EXHAUSTIVE_LIMIT:
        log.info("subset search: %d free nodes, returning structured witness", len(rest))
        return frozenset(net.members(witness))
    bits = [net.bit(v) for v in rest]
    limit = bin(witness & ~base).count("1")
    for k in range(limit + 1):
        for combo in itertools.combinations(range(len(rest)), k):
            S = base
            for c in combo:
                S |= bits[c]
            if _qualifies(net, S, m11, m22, mode):
                return frozenset(net.members(S))
    raise InvariantViolation("structured witness not reproduced by ordered search")


# -- key nodes -------------------------------------------------------------------------
def find_key_node(net: LayeredNetwork, S: Iterable[str] | None, p: Path, i: int):
    """First node of ``p`` whose removal cuts d_i from the other source in G[S]."""
    Sm = net.full_mask if S is None else net.mask(S)
    other, dst = net.source(3 - i), net.dest(i)
    if not net.reaches(other, dst, Sm):
        return None
    for v in p:
        if v == other:
            continue
        if not net.reaches(other, dst, Sm & ~net.bit(v)):
            return KeyNode(v, i, net.layer[v] - 1)
    return None


def key_node_witnesses(net: LayeredNetwork, S: Iterable[str] | None, key: KeyNode):
    """Paths from s1 and s2 meeting only at the key node, plus the input
    nodes of the key node that the other source reaches inside G[S]."""
    Sm = net.full_mask if S is None else net.mask(S)
    vp = key.node
    inputs = net.in_mask(vp) & Sm
    flows = disjoint_flow_paths(net, net.sources, net.members(inputs), Sm & ~net.bit(vp))
    if len(flows) < 2:
        raise InvariantViolation(f"no two disjoint source paths into the inputs of {vp}")
    by_src = {p[0]: p + (vp,) for p in flows}
    other = net.source(3 - key.pair_index)
    reach = net.forward_closure(net.bit(other), Sm)
    reached = [u for u in net.members(inputs & reach)]
    reached.sort(key=net.index.get)
    if len(reached) < 2:
        raise InvariantViolation(f"fewer than two inputs of {vp} reached from {other}")
    return (by_src[net.s1], by_src[net.s2]), reached
