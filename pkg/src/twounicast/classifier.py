"""Sum-DoF and DoF-region classification with structural witnesses.

The fast classifier works on bitmasks and the layer-pair search from
``netmodel``; ``brute_force_classify`` wraps the exhaustive routines in
``oracle`` and shares no search code with it.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from . import oracle
from .interference import (
    count,
    direct_count,
    find_manageable_subset,
    interferer_mask,
    manageable_witness,
)
from .netmodel import LayeredNetwork, Path, disjoint_flow_paths, disjoint_pair, iter_paths

log = logging.getLogger(__name__)

MAX_PAIRS = 50_000


class Indeterminate(RuntimeError):
    """A search cap was hit before the case could be decided."""


# -- witnesses ----------------------------------------------------------------------------
@dataclass(frozen=True)
class CaseAWitness:
    variant: str  # "A" or "A'"
    pair: int
    node: str | None = None
    edge: tuple[str, str] | None = None

    def summary(self) -> str:
        return self.node if self.variant == "A" else f"{self.edge[0]}->{self.edge[1]}"


@dataclass(frozen=True)
class PairWitness:
    p11: Path
    p22: Path
    subset: frozenset

    def summary(self) -> str:
        return f"p11={','.join(self.p11)} p22={','.join(self.p22)}"


@dataclass(frozen=True)
class ButterflyWitness:
    u0: str
    u1: str
    shared: Path
    p11: Path
    p22: Path
    p12: Path
    p21: Path

    def summary(self) -> str:
        return f"butterfly u0={self.u0} u1={self.u1} shared={','.join(self.shared)}"


@dataclass(frozen=True)
class GrailWitness:
    orientation: int  # 1: w_a on P12 as stated; 2: pairs exchanged, w_a on P21
    p12: Path
    p21: Path
    wa: str
    wb: str

    def summary(self) -> str:
        return f"grail orientation={self.orientation} wa={self.wa} wb={self.wb}"


@dataclass(frozen=True)
class C1Witness:
    """Named nodes of the asymmetric 3/2 structure.  ``swapped`` means the
    names refer to the network with the two pairs exchanged."""

    p11: Path
    p22: Path
    nodes: dict  # "v0".."v6", "vm" -> node id
    feeder: Path  # P_{vm, v1}
    swapped: bool

    def __getitem__(self, k):
        return self.nodes[k]

    def summary(self) -> str:
        named = " ".join(f"{k}={self.nodes[k]}" for k in sorted(self.nodes))
        return f"swapped={int(self.swapped)} {named}"


@dataclass(frozen=True)
class C2Witness:
    p22: Path
    q11: Path
    z11: Path
    nodes: dict  # "v1".."v4"
    swapped: bool

    def __getitem__(self, k):
        return self.nodes[k]

    def summary(self) -> str:
        named = " ".join(f"{k}={self.nodes[k]}" for k in sorted(self.nodes))
        return f"swapped={int(self.swapped)} {named}"


@dataclass(frozen=True)
class Classification:
    case: str  # A, A', B, B', C1, C2, disconnected
    sum_dof: Fraction
    witness: object = None

    def oriented(self, net: LayeredNetwork) -> LayeredNetwork:
        """The network labeling the witness refers to."""
        return net.swapped() if getattr(self.witness, "swapped", False) else net


# -- case A ---------------------------------------------------------------------------------
def _cut_sets(net: LayeredNetwork, i: int):
    full = net.full_mask
    d, other = net.dest(i), net.source(3 - i)
    srcs, dsts = net.mask(net.sources), net.mask(net.destinations)
    cut_d, cut_s = set(), set()
    for v in net.nodes:
        keep = full & ~net.bit(v)
        if v == d or not net.forward_closure(srcs & keep, keep) & net.bit(d):
            cut_d.add(v)
        if v == other or not net.forward_closure(net.bit(other), keep) & dsts & keep:
            cut_s.add(v)
    return cut_d, cut_s


def detect_case_A(net: LayeredNetwork):
    cuts = {i: _cut_sets(net, i) for i in (1, 2)}
    for i in (1, 2):
        cut_d, cut_s = cuts[i]
        both = [v for v in net.nodes if v in cut_d and v in cut_s]
        if both:
            return CaseAWitness("A", i, node=both[0])
    for i in (1, 2):
        cut_d, cut_s = cuts[i]
        for v2, v1 in sorted(net.edges):
            if v1 in cut_d and v2 in cut_s:
                return CaseAWitness("A'", i, edge=(v2, v1))
    return None


# -- disjoint pairs --------------------------------------------------------------------------
def disjoint_pairs(net: LayeredNetwork, cap: int = MAX_PAIRS):
    """All vertex-disjoint (P11, P22); raises Indeterminate past ``cap``."""
    out = []
    full = net.full_mask
    for p in iter_paths(net, net.s1, net.d1):
        for q in iter_paths(net, net.s2, net.d2, full & ~net.mask(p)):
            out.append((p, q))
            if len(out) > cap:
                raise Indeterminate(f"more than {cap} disjoint path pairs")
    return out


def _pair_masks(net, pair):
    return net.mask(pair[0]), net.mask(pair[1])


# -- butterfly and grail ------------------------------------------------------------------
def detect_butterfly(net: LayeredNetwork):
    r = net.r
    prefix, suffix = {}, {}
    for u in net.nodes:
        if net.layer[u] > 1:
            ins = net.members(net.in_mask(u))
            fl = disjoint_flow_paths(net, net.sources, ins) if len(ins) >= 2 else []
            if len(fl) == 2:
                prefix[u] = {p[0]: p + (u,) for p in fl}
        if net.layer[u] < r:
            outs = net.members(net.out_mask(u))
            fl = disjoint_flow_paths(net, outs, net.destinations) if len(outs) >= 2 else []
            if len(fl) == 2:
                suffix[u] = {p[-1]: (u,) + p for p in fl}
    ends1, ends2 = (net.s1, net.d2), (net.s2, net.d1)
    cands = [(u0, u1) for u0 in prefix for u1 in suffix if net.reaches(u0, u1)]
    cands.sort(key=lambda c: (-net.layer[c[1]], net.index[c[1]], net.index[c[0]]))
    for u0, u1 in cands:
        for q in iter_paths(net, u0, u1):
            pair = disjoint_pair(net, ends1, ends2, net.full_mask & ~net.mask(q), net.full_mask & ~net.mask(q))
            if pair is None:
                continue
            pre, suf = prefix[u0], suffix[u1]
            p11 = pre[net.s1][:-1] + q + suf[net.d1][1:]
            p22 = pre[net.s2][:-1] + q + suf[net.d2][1:]
            return ButterflyWitness(u0, u1, q, p11, p22, pair[0], pair[1])
    return None


def check_butterfly(net: LayeredNetwork, w: ButterflyWitness) -> bool:
    def is_path(p, a, b):
        return p[0] == a and p[-1] == b and all(e in net.edges for e in zip(p, p[1:]))

    return (
        is_path(w.shared, w.u0, w.u1)
        and is_path(w.p11, net.s1, net.d1)
        and is_path(w.p22, net.s2, net.d2)
        and is_path(w.p12, net.s1, net.d2)
        and is_path(w.p21, net.s2, net.d1)
        and set(w.p11) & set(w.p22) == set(w.shared)
        and not set(w.p12) & set(w.p21)
        and not (set(w.p12) | set(w.p21)) & set(w.shared)
    )


def detect_grail(net: LayeredNetwork):
    ends1, ends2 = (net.s1, net.d2), (net.s2, net.d1)
    fwd = {v: net.forward_closure(net.bit(v)) for v in net.nodes}
    for orient, src, dst in ((1, net.s2, net.d2), (2, net.s1, net.d1)):
        for wa in net.members(fwd[src]):
            for wb in net.members(fwd[wa]):
                if wb == wa or not fwd[wb] & net.bit(dst):
                    continue
                if orient == 1:
                    pair = disjoint_pair(net, ends1, ends2, via1=(wa,), via2=(wb,))
                else:
                    pair = disjoint_pair(net, ends1, ends2, via1=(wb,), via2=(wa,))
                if pair is not None:
                    return GrailWitness(orient, pair[0], pair[1], wa, wb)
    return None


def check_grail(net: LayeredNetwork, w: GrailWitness) -> bool:
    ok_paths = (
        w.p12[0] == net.s1 and w.p12[-1] == net.d2 and w.p21[0] == net.s2 and w.p21[-1] == net.d1
        and all(e in net.edges for p in (w.p12, w.p21) for e in zip(p, p[1:]))
        and not set(w.p12) & set(w.p21)
    )
    if not ok_paths:
        return False
    if w.orientation == 1:
        return (
            w.wa in w.p12 and w.wb in w.p21
            and net.reaches(net.s2, w.wa) and net.reaches(w.wa, w.wb) and net.reaches(w.wb, net.d2)
        )
    return (
        w.wa in w.p21 and w.wb in w.p12
        and net.reaches(net.s1, w.wa) and net.reaches(w.wa, w.wb) and net.reaches(w.wb, net.d1)
    )


# -- C1 / C2 witnesses ------------------------------------------------------------------------
def _c1_counts(net, m11, m22, i=1) -> bool:
    j = 3 - i
    full = net.full_mask
    return (
        count(net, full, m11, m22, i) >= 2
        and direct_count(net, m11, m22, i) == 1
        and count(net, full, m11, m22, j) == 1
        and direct_count(net, m11, m22, j) == 0
    )


def _all_paths_hit(net: LayeredNetwork, a: str, b: str, nodes) -> bool:
    """Every a ⇝ b path meets every node in ``nodes`` (vacuous if none exist)."""
    for v in nodes:
        if net.reaches(a, b, net.full_mask & ~net.bit(v)):
            return False
    return True


def _cuts(net: LayeredNetwork, removed, starts, goal_set) -> bool:
    keep = net.full_mask & ~net.mask(removed)
    reach = net.forward_closure(net.mask(starts) & keep, keep)
    return not reach & net.mask(goal_set) & keep


def c1_properties(net: LayeredNetwork, w: C1Witness) -> dict:
    v = w.nodes
    s1, s2, d1, d2 = net.s1, net.s2, net.d1, net.d2
    both_s = (s1, s2)
    edge20 = (v["v2"], v["v0"]) in net.edges

    def hit_pair(a, b, x, y):
        # every a ⇝ b path contains {x, y} as a pair, or {z, w}
        return _all_paths_hit(net, a, b, (x, y))

    def p3():
        # every s2 ⇝ d1 path contains {v6, v2} or {v3, v4}
        for p in iter_paths(net, s2, d1):
            if not ({v["v6"], v["v2"]} <= set(p) or {v["v3"], v["v4"]} <= set(p)):
                return False
        return True

    def p8():
        return all(
            v["v6"] in p for s in both_s for p in iter_paths(net, s, v["v2"])
        )

    return {
        "P1": edge20 and hit_pair(s1, d2, v["v2"], v["v0"]),
        "P2": hit_pair(s1, d2, v["v5"], v["v6"]),
        "P3": p3(),
        "P4": edge20 and net.reaches(s2, d2) and _cuts(net, (v["v0"],), both_s, (d2,)),
        "P5": _cuts(net, (v["v5"],), (s1,), (d1, d2)),
        "P6": _cuts(net, (v["v2"], v["v3"]), both_s, (d2,)),
        "P7": _cuts(net, (v["v2"], v["v4"]), both_s, (d1,)),
        "P8": p8(),
    }


def extract_c1(net: LayeredNetwork, p11: Path, p22: Path, swapped: bool = False):
    """Name v0..v6, vm for a pair meeting the C1 counts (pair-1 roles)."""
    m11, m22 = net.mask(p11), net.mask(p22)
    full = net.full_mask
    direct = [(a, b) for a in p22 for b in net.succ[a] if m11 & net.bit(b)]
    if len(direct) != 1:
        return None
    v3, v4 = direct[0]
    inter = interferer_mask(net, full, m11, 1) & ~m22
    for v1 in sorted(net.members(inter), key=net.index.get):
        for feeder in iter_paths(net, net.s2, v1, full & ~m11):
            vm = [x for x in feeder if m22 & net.bit(x)][-1]
            tail = feeder[feeder.index(vm):]
            s_star = m11 | m22 | net.mask(tail)
            on22 = net.members(interferer_mask(net, s_star, m22, 2))
            if len(on22) != 1 or on22[0] not in tail[1:]:
                continue
            v2 = on22[0]
            v0 = next(b for b in net.succ[v2] if m22 & net.bit(b))
            p_s1_v2 = next(iter_paths(net, net.s1, v2, s_star & ~m22, limit=1), None)
            if p_s1_v2 is None:
                continue
            k = max(n for n, x in enumerate(p_s1_v2) if m11 & net.bit(x))
            v5, v6 = p_s1_v2[k], p_s1_v2[k + 1]
            names = dict(v0=v0, v1=v1, v2=v2, v3=v3, v4=v4, v5=v5, v6=v6, vm=vm)
            w = C1Witness(tuple(p11), tuple(p22), names, tail, swapped)
            if all(c1_properties(net, w).values()):
                return w
    return None


def c2_properties(net: LayeredNetwork, w: C2Witness) -> dict:
    v = w.nodes
    s1, s2, d1, d2 = net.s1, net.s2, net.d1, net.d2
    m22, mq, mz = net.mask(w.p22), net.mask(w.q11), net.mask(w.z11)

    def directs(src_mask, dst_mask):
        return {(a, b) for a in net.members(src_mask) for b in net.succ[a] if dst_mask & net.bit(b)}

    return {
        "P1": (v["v2"], v["v1"]) in net.edges and _all_paths_hit(net, s2, d1, (v["v2"], v["v1"])),
        "P2": v["v1"] not in w.q11 and not mq & m22,
        "P3": not directs(m22, mq) and directs(mq, m22) == {(v["v3"], v["v4"])},
        "P4": (v["v3"], v["v4"]) in net.edges and _all_paths_hit(net, s1, d2, (v["v3"], v["v4"])),
        "P5": v["v3"] not in w.z11 and not mz & m22,
        "P6": directs(m22, mz) == {(v["v2"], v["v1"])} and not directs(mz, m22),
        "P7": _cuts(net, (v["v4"],), (s1, s2), (d2,)),
        "P8": _cuts(net, (v["v2"],), (s2,), (d1, d2)),
        "P9": _cuts(net, (v["v1"], v["v3"]), (s1, s2), (d1,)),
        "P10": not net.reaches(v["v1"], v["v3"]),
    }


def extract_c2(net: LayeredNetwork, swapped: bool = False, cap: int = MAX_PAIRS):
    """Search P22, Q11, Z11 and the edges (v2, v1), (v3, v4) satisfying P1-P10."""
    full = net.full_mask
    seen = 0
    for p22 in iter_paths(net, net.s2, net.d2):
        m22 = net.mask(p22)
        qs, zs = [], []
        for x in iter_paths(net, net.s1, net.d1, full & ~m22):
            seen += 1
            if seen > cap:
                return None
            mx = net.mask(x)
            into = [(a, b) for a in p22 for b in net.succ[a] if mx & net.bit(b)]
            out = [(a, b) for a in x for b in net.succ[a] if m22 & net.bit(b)]
            if not into and len(out) == 1:
                qs.append((x, out[0]))
            if len(into) == 1 and not out:
                zs.append((x, into[0]))
        for z, (v2, v1) in zs:
            for q, (v3, v4) in qs:
                if v1 in q or v3 in z:
                    continue
                w = C2Witness(p22, q, z, dict(v1=v1, v2=v2, v3=v3, v4=v4), swapped)
                if all(c2_properties(net, w).values()):
                    return w
    return None


@dataclass
class PropertyReport:
    case: str
    results: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return bool(self.results) and all(self.results.values())

    def failed(self) -> list:
        return [k for k, v in self.results.items() if not v]


def verify_structural_properties(net: LayeredNetwork, classification) -> PropertyReport:
    w = classification.witness if isinstance(classification, Classification) else classification
    if isinstance(w, C1Witness):
        g = net.swapped() if w.swapped else net
        return PropertyReport("C1", c1_properties(g, w))
    if isinstance(w, C2Witness):
        g = net.swapped() if w.swapped else net
        return PropertyReport("C2", c2_properties(g, w))
    raise ValueError("structural properties apply to C1/C2 witnesses only")


# -- sum-DoF -----------------------------------------------------------------------------------
def _classify_c(net: LayeredNetwork, pairs) -> Classification:
    c1_pair = None
    for p11, p22 in pairs:
        m11, m22 = net.mask(p11), net.mask(p22)
        for i in (1, 2):
            if not _c1_counts(net, m11, m22, i):
                continue
            if c1_pair is None:
                c1_pair = (p11, p22, i)
            if i == 1:
                w = extract_c1(net, p11, p22)
            else:
                w = extract_c1(net.swapped(), p22, p11, swapped=True)
            if w is not None:
                return Classification("C1", Fraction(3, 2), w)
    if c1_pair is not None:
        log.warning("C1 counts met but no witness satisfied the structural properties")
        return Classification("C1", Fraction(3, 2), None)
    w = extract_c2(net) or extract_c2(net.swapped(), swapped=True)
    if w is None:
        log.warning("no C2 witness satisfied the structural properties")
    return Classification("C2", Fraction(3, 2), w)


def classify_sum_dof(net: LayeredNetwork, fallback: bool = True) -> Classification:
    conn = [net.reaches(net.source(i), net.dest(i)) for i in (1, 2)]
    if not all(conn):
        return Classification("disconnected", Fraction(sum(conn)), tuple(i for i in (1, 2) if not conn[i - 1]))
    a = detect_case_A(net)
    if a is not None:
        return Classification(a.variant, Fraction(1), a)
    try:
        pairs = disjoint_pairs(net)
    except Indeterminate:
        if fallback and len(net.nodes) <= oracle.MAX_NODES:
            log.info("pair cap hit, falling back to the exhaustive classifier")
            return brute_force_classify(net)
        raise
    for p11, p22 in pairs:
        m11, m22 = net.mask(p11), net.mask(p22)
        if manageable_witness(net, m11, m22) is not None:
            S = find_manageable_subset(net, p11, p22)
            return Classification("B", Fraction(2), PairWitness(p11, p22, S))
    bf = detect_butterfly(net)
    if bf is not None:
        return Classification("B'", Fraction(2), bf)
    gr = detect_grail(net)
    if gr is not None:
        return Classification("B'", Fraction(2), gr)
    return _classify_c(net, pairs)


def brute_force_classify(net: LayeredNetwork) -> Classification:
    case, dof, w = oracle.classify(net)
    if case in ("A", "A'"):
        _, i, x = w
        wit = CaseAWitness(case, i, node=x) if case == "A" else CaseAWitness(case, i, edge=x)
    elif case == "B":
        wit = PairWitness(w[0], w[1], w[2])
    elif case == "B'" and w[0] == "butterfly":
        mid, a, b, c, d = w[1:]
        wit = ButterflyWitness(mid[0], mid[-1], mid, a, b, c, d)
    elif case == "B'":
        orient, c, d, wa, wb = w[1:]
        wit = GrailWitness(orient, c, d, wa, wb)
    else:
        wit = w
    return Classification(case, dof, wit)


def claim1_structures(net: LayeredNetwork) -> dict:
    """Which of the three structures (disjoint pair, butterfly, grail) exist."""
    return {
        "disjoint_pair": disjoint_pair(net, (net.s1, net.d1), (net.s2, net.d2)) is not None,
        "butterfly": detect_butterfly(net) is not None,
        "grail": detect_grail(net) is not None,
    }


# -- regions ---------------------------------------------------------------------------------------
HALF = Fraction(1, 2)

REGION_CONSTRAINTS = {
    # rows (a, b, c): a*D1 + b*D2 <= c, on top of D1, D2 >= 0
    "I": [(1, 1, 1)],
    "II": [(1, 0, 1), (0, 1, 1)],
    "III": [(1, 0, 1), (0, 1, 1), (1, 1, Fraction(3, 2))],
    "IV": [(1, 0, 1), (1, 2, 2)],
    "V": [(0, 1, 1), (2, 1, 2)],
}

CORNERS = {
    "I": [(Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))],
    "II": [(Fraction(1), Fraction(1))],
    "III": [(Fraction(1), HALF), (HALF, Fraction(1))],
    "IV": [(Fraction(1), HALF)],
    "V": [(HALF, Fraction(1))],
}


def polytope_vertices(constraints) -> list:
    """Vertices of {D >= 0, a D1 + b D2 <= c} by intersecting constraint lines."""
    rows = [tuple(map(Fraction, c)) for c in constraints] + [
        (Fraction(-1), Fraction(0), Fraction(0)),
        (Fraction(0), Fraction(-1), Fraction(0)),
    ]
    pts = set()
    for (a1, b1, c1), (a2, b2, c2) in combinations(rows, 2):
        det = a1 * b2 - a2 * b1
        if det == 0:
            continue
        x = (c1 * b2 - c2 * b1) / det
        y = (a1 * c2 - a2 * c1) / det
        if all(a * x + b * y <= c for a, b, c in rows):
            pts.add((x, y))
    return sorted(pts, key=lambda p: (-p[0], p[1]))


@dataclass(frozen=True)
class RegionClassification:
    region: str
    vertices: list  # the corner points named for the region
    constraints: list
    witness: object = None
    classification: Classification | None = None

    def all_vertices(self) -> list:
        return [p for p in polytope_vertices(self.constraints) if p != (0, 0)]

    def max_sum(self) -> Fraction:
        return max(x + y for x, y in polytope_vertices(self.constraints))


@dataclass(frozen=True)
class RegionPaths:
    """Q/Z path system: ``fixed`` is the path of the pair held fixed."""

    fixed: Path
    q: Path
    z: Path


def _single_manageability(net, pairs):
    out = {}
    for p11, p22 in pairs:
        m11, m22 = net.mask(p11), net.mask(p22)
        out[(p11, p22)] = (
            manageable_witness(net, m11, m22, "pair1-only") is not None,
            manageable_witness(net, m11, m22, "pair2-only") is not None,
        )
    return out


def classify_region(net: LayeredNetwork, classification: Classification | None = None):
    c = classification or classify_sum_dof(net)
    if c.case == "disconnected":
        ok = [i for i in (1, 2) if i not in c.witness]
        cons = [(1, 0, 0 if 1 not in ok else 1), (0, 1, 0 if 2 not in ok else 1)]
        corners = [p for p in polytope_vertices(cons) if p != (0, 0)]
        return RegionClassification("disconnected", corners, cons, None, c)
    if c.case in ("A", "A'"):
        return RegionClassification("I", CORNERS["I"], REGION_CONSTRAINTS["I"], c.witness, c)
    if c.case in ("B", "B'"):
        return RegionClassification("II", CORNERS["II"], REGION_CONSTRAINTS["II"], c.witness, c)
    single = _single_manageability(net, disjoint_pairs(net))
    for pair, (a, b) in single.items():
        if a and b:
            return RegionClassification("III", CORNERS["III"], REGION_CONSTRAINTS["III"], pair, c)
    for label, fixed_idx in (("IV", 1), ("V", 0)):
        groups: dict = {}
        for pair, (a, b) in single.items():
            g = groups.setdefault(pair[fixed_idx], [None, None])
            if a and g[0] is None:
                g[0] = pair[1 - fixed_idx]
            if b and g[1] is None:
                g[1] = pair[1 - fixed_idx]
        for fixed, (q, z) in groups.items():
            if q is not None and z is not None:
                return RegionClassification(
                    label, CORNERS[label], REGION_CONSTRAINTS[label], RegionPaths(fixed, q, z), c
                )
    raise Indeterminate("no region path system found for a case-C network")
