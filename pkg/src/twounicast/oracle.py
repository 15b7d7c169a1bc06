"""Brute-force reference implementations.

Everything here works on explicit node sets and full path enumeration and
shares no search code with the fast routines, so the two can be compared.
Only intended for small networks.
"""
from __future__ import annotations

import itertools

from .netmodel import LayeredNetwork

MAX_NODES = 14


class OracleRefused(ValueError):
    pass


def _guard(net: LayeredNetwork, limit: int = MAX_NODES):
    if len(net.nodes) > limit:
        raise OracleRefused(f"network has {len(net.nodes)} nodes; oracle limit is {limit}")


def paths(net: LayeredNetwork, u: str, v: str, allowed=None) -> list[tuple]:
    """Every u ⇝ v path whose nodes all lie in ``allowed`` (a set)."""
    ok = set(net.nodes) if allowed is None else set(allowed)
    if u not in ok or v not in ok:
        return []
    out = []

    def walk(p):
        last = p[-1]
        if last == v:
            out.append(tuple(p))
            return
        for w in net.succ[last]:
            if w in ok:
                walk(p + [w])

    walk([u])
    return out


def reach(net: LayeredNetwork, u: str, v: str, removed=()) -> bool:
    if u in removed or v in removed:
        return False
    seen, stack = {u}, [u]
    while stack:
        x = stack.pop()
        if x == v:
            return True
        for w in net.succ[x]:
            if w not in seen and w not in removed:
                seen.add(w)
                stack.append(w)
    return False


# -- disjoint paths -------------------------------------------------------------------
def disjoint_path_pairs(net, ends1, ends2, avoid=frozenset()):
    ok = set(net.nodes) - set(avoid)
    ps = paths(net, *ends1, allowed=ok)
    qs = paths(net, *ends2, allowed=ok)
    return [(p, q) for p in ps for q in qs if not set(p) & set(q)]


def has_disjoint_pair(net, ends1, ends2) -> bool:
    return bool(disjoint_path_pairs(net, ends1, ends2))


# -- interference ------------------------------------------------------------------------
def interferers(net: LayeredNetwork, S, p11, p22, i: int) -> set:
    """Definition-level count: nodes of S off the target path with an edge into
    it and some feeder path from the other source inside S avoiding it."""
    target = set(p11 if i == 1 else p22)
    other = net.source(3 - i)
    room = set(S) - target
    found = set()
    for v in room:
        if not any(w in target for w in net.succ[v]):
            continue
        if paths(net, other, v, allowed=room):
            found.add(v)
    return found


def direct_interferers(net, p11, p22, i: int) -> set:
    target, companion = (p11, p22) if i == 1 else (p22, p11)
    return {v for v in companion if any(w in target for w in net.succ[v])}


def manageable_subsets(net: LayeredNetwork, p11, p22, mode: str = "both"):
    """Yield every qualifying S ⊇ p11 ∪ p22."""
    base = set(p11) | set(p22)
    rest = [v for v in net.nodes if v not in base]
    for k in range(len(rest) + 1):
        for extra in itertools.combinations(rest, k):
            S = base | set(extra)
            n1 = len(interferers(net, S, p11, p22, 1))
            n2 = len(interferers(net, S, p11, p22, 2))
            if mode == "both":
                good = n1 != 1 and n2 != 1
            elif mode == "pair1-only":
                good = n1 != 1
            else:
                good = n2 != 1
            if good:
                yield frozenset(S)


def manageable(net, p11, p22, mode="both") -> bool:
    return next(manageable_subsets(net, p11, p22, mode), None) is not None


# -- case A / A' ----------------------------------------------------------------------------
def _cuts_dest(net, v, i) -> bool:
    d = net.dest(i)
    return v == d or not any(reach(net, s, d, {v}) for s in net.sources)


def _cuts_source(net, v, i) -> bool:
    s = net.source(3 - i)
    return v == s or not any(reach(net, s, d, {v}) for d in net.destinations)


def case_a(net: LayeredNetwork):
    for i in (1, 2):
        for v in net.nodes:
            if _cuts_dest(net, v, i) and _cuts_source(net, v, i):
                return ("A", i, v)
    for i in (1, 2):
        for (v2, v1) in sorted(net.edges):
            if _cuts_dest(net, v1, i) and _cuts_source(net, v2, i):
                return ("A'", i, (v2, v1))
    return None


# -- butterfly / grail --------------------------------------------------------------------------
def _contiguous(net, p, shared) -> tuple | None:
    idx = [k for k, v in enumerate(p) if v in shared]
    if not idx or idx != list(range(idx[0], idx[-1] + 1)):
        return None
    return tuple(p[idx[0] : idx[-1] + 1])


def butterflies(net: LayeredNetwork):
    """Yield (shared path, P11, P22, P12, P21) embeddings."""
    p11s = paths(net, net.s1, net.d1)
    p22s = paths(net, net.s2, net.d2)
    cross = disjoint_path_pairs(net, (net.s1, net.d2), (net.s2, net.d1))
    if not cross:
        return
    for a in p11s:
        for b in p22s:
            shared = set(a) & set(b)
            mid = _contiguous(net, a, shared)
            if mid is None or _contiguous(net, b, shared) != mid:
                continue
            for c, d in cross:
                if not (set(c) | set(d)) & shared:
                    yield mid, a, b, c, d
                    break


def grails(net: LayeredNetwork):
    """Yield (orientation, P12, P21, w_a, w_b) embeddings; orientation 1 is
    the stated one, 2 the one with the pairs exchanged."""
    for c, d in disjoint_path_pairs(net, (net.s1, net.d2), (net.s2, net.d1)):
        for wa in c:
            for wb in d:
                if reach(net, net.s2, wa) and reach(net, wa, wb) and reach(net, wb, net.d2):
                    yield 1, c, d, wa, wb
        for wa in d:
            for wb in c:
                if reach(net, net.s1, wa) and reach(net, wa, wb) and reach(net, wb, net.d1):
                    yield 2, c, d, wa, wb


# -- sum-DoF ------------------------------------------------------------------------------------
def classify(net: LayeredNetwork):
    """(case, sum_dof, witness) by exhaustive search."""
    from fractions import Fraction

    _guard(net)
    conn = [reach(net, net.source(i), net.dest(i)) for i in (1, 2)]
    if not all(conn):
        return "disconnected", Fraction(sum(conn)), tuple(i + 1 for i in range(2) if not conn[i])
    a = case_a(net)
    if a is not None:
        return a[0], Fraction(1), a
    pairs = disjoint_path_pairs(net, (net.s1, net.d1), (net.s2, net.d2))
    for p11, p22 in pairs:
        S = next(manageable_subsets(net, p11, p22), None)
        if S is not None:
            return "B", Fraction(2), (p11, p22, S)
    bf = next(butterflies(net), None)
    if bf is not None:
        return "B'", Fraction(2), ("butterfly",) + bf
    gr = next(grails(net), None)
    if gr is not None:
        return "B'", Fraction(2), ("grail",) + gr
    for p11, p22 in pairs:
        for i in (1, 2):
            j = 3 - i
            if (
                len(interferers(net, net.nodes, p11, p22, i)) >= 2
                and len(direct_interferers(net, p11, p22, i)) == 1
                and len(interferers(net, net.nodes, p11, p22, j)) == 1
                and len(direct_interferers(net, p11, p22, j)) == 0
            ):
                return "C1", Fraction(3, 2), (p11, p22, i)
    return "C2", Fraction(3, 2), pairs[0] if pairs else None


def region_label(net: LayeredNetwork):
    """Region I..V by exhaustive search over path systems."""
    case, _, _ = classify(net)
    if case in ("A", "A'", "disconnected"):
        return "I" if case != "disconnected" else "disconnected"
    if case in ("B", "B'"):
        return "II"
    pairs = disjoint_path_pairs(net, (net.s1, net.d1), (net.s2, net.d2))
    single = {
        (p, q): (manageable(net, p, q, "pair1-only"), manageable(net, p, q, "pair2-only"))
        for p, q in pairs
    }
    if any(a and b for a, b in single.values()):
        return "III"
    for fixed, k in ((1, "IV"), (0, "V")):
        groups: dict = {}
        for (p, q), (m1, m2) in single.items():
            key = q if fixed == 1 else p
            g = groups.setdefault(key, [False, False])
            g[0] |= m1
            g[1] |= m2
        if any(g[0] and g[1] for g in groups.values()):
            return k
    return None
