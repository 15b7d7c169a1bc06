"""Layered two-unicast networks: representation, text format, reachability,
path algebra, vertex-disjoint path search and the layer-doubling transform.

Nodes are string ids.  Every node also gets a bit position so that node sets
can be handled as Python ints; most graph queries in the package run on those
masks.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import networkx as nx
import numpy as np

log = logging.getLogger(__name__)

Path = tuple  # tuple of node ids in layer order

GAIN_LOW, GAIN_HIGH = 0.5, 2.0


class NetworkError(ValueError):
    """Structurally malformed network (duplicate ids, dangling edges, ...)."""


class ParseError(NetworkError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def draw_gain(rng: np.random.Generator) -> float:
    """Generic gain: magnitude uniform in [0.5, 2], independent random sign."""
    mag = rng.uniform(GAIN_LOW, GAIN_HIGH)
    return float(mag if rng.random() < 0.5 else -mag)


@dataclass(frozen=True, eq=False)
class LayeredNetwork:
    """Immutable layered graph with real nonzero edge gains and two unicast pairs.

    ``layers[j]`` holds the ids of layer j+1.  ``edges`` maps (tail, head) to
    the gain.  Layer 1 must be {s1, s2} and the last layer {d1, d2}; every
    edge must join consecutive layers.
    """

    layers: tuple[tuple[str, ...], ...]
    edges: Mapping[tuple[str, str], float]
    s1: str
    d1: str
    s2: str
    d2: str
    # derived, filled in __post_init__
    layer: dict = field(init=False, repr=False)
    nodes: tuple = field(init=False, repr=False)
    index: dict = field(init=False, repr=False)
    succ: dict = field(init=False, repr=False)
    pred: dict = field(init=False, repr=False)
    _out: list = field(init=False, repr=False)
    _in: list = field(init=False, repr=False)

    def __post_init__(self):
        layers = tuple(tuple(layer) for layer in self.layers)
        object.__setattr__(self, "layers", layers)
        layer_of: dict[str, int] = {}
        for j, ids in enumerate(layers, start=1):
            for v in ids:
                if v in layer_of:
                    raise NetworkError(f"duplicate node id {v!r}")
                layer_of[v] = j
        nodes = tuple(v for ids in layers for v in ids)
        terms = (self.s1, self.d1, self.s2, self.d2)
        if len(set(terms)) != 4:
            raise NetworkError("terminals s1, d1, s2, d2 must be distinct")
        for t in terms:
            if t not in layer_of:
                raise NetworkError(f"terminal {t!r} is not a node")
        if len(layers) < 2:
            raise NetworkError("need at least two layers")
        if set(layers[0]) != {self.s1, self.s2}:
            raise NetworkError("first layer must be exactly {s1, s2}")
        if set(layers[-1]) != {self.d1, self.d2}:
            raise NetworkError("last layer must be exactly {d1, d2}")
        edges: dict[tuple[str, str], float] = {}
        for (u, v), g in dict(self.edges).items():
            if u not in layer_of or v not in layer_of:
                raise NetworkError(f"dangling edge ({u}, {v})")
            if layer_of[v] != layer_of[u] + 1:
                raise NetworkError(
                    f"edge ({u}, {v}) joins layers {layer_of[u]} and {layer_of[v]}"
                )
            g = float(g)
            if g == 0.0 or not np.isfinite(g):
                raise NetworkError(f"edge ({u}, {v}): stored edges carry nonzero gain")
            edges[(u, v)] = g
        index = {v: i for i, v in enumerate(nodes)}
        succ: dict[str, list[str]] = {v: [] for v in nodes}
        pred: dict[str, list[str]] = {v: [] for v in nodes}
        for u, v in sorted(edges, key=lambda e: (index[e[0]], index[e[1]])):
            succ[u].append(v)
            pred[v].append(u)
        out = [0] * len(nodes)
        inn = [0] * len(nodes)
        for u, v in edges:
            out[index[u]] |= 1 << index[v]
            inn[index[v]] |= 1 << index[u]
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "layer", layer_of)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "succ", {v: tuple(s) for v, s in succ.items()})
        object.__setattr__(self, "pred", {v: tuple(p) for v, p in pred.items()})
        object.__setattr__(self, "_out", out)
        object.__setattr__(self, "_in", inn)

    # -- basic accessors -------------------------------------------------
    @property
    def r(self) -> int:
        return len(self.layers)

    @property
    def sources(self) -> tuple[str, str]:
        return (self.s1, self.s2)

    @property
    def destinations(self) -> tuple[str, str]:
        return (self.d1, self.d2)

    @property
    def terminals(self) -> tuple[str, str, str, str]:
        return (self.s1, self.s2, self.d1, self.d2)

    def source(self, i: int) -> str:
        return self.s1 if i == 1 else self.s2

    def dest(self, i: int) -> str:
        return self.d1 if i == 1 else self.d2

    def gain(self, u: str, v: str) -> float:
        return self.edges.get((u, v), 0.0)

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, v) -> bool:
        return v in self.index

    def __eq__(self, other) -> bool:
        if not isinstance(other, LayeredNetwork):
            return NotImplemented
        return (
            self.layers == other.layers
            and self.edges == other.edges
            and (self.s1, self.d1, self.s2, self.d2) == (other.s1, other.d1, other.s2, other.d2)
        )

    def __hash__(self):
        return hash((self.layers, tuple(sorted(self.edges.items())), self.s1, self.s2))

    def __repr__(self) -> str:
        return f"LayeredNetwork(r={self.r}, |V|={len(self.nodes)}, |E|={len(self.edges)})"

    # -- masks --------------------------------------------------------------
    def _check(self, v: str) -> int:
        try:
            return self.index[v]
        except KeyError:
            raise NetworkError(f"unknown node {v!r}") from None

    def bit(self, v: str) -> int:
        return 1 << self._check(v)

    def mask(self, vs: Iterable[str]) -> int:
        m = 0
        for v in vs:
            m |= 1 << self._check(v)
        return m

    @property
    def full_mask(self) -> int:
        return (1 << len(self.nodes)) - 1

    def members(self, m: int) -> list[str]:
        out = []
        while m:
            low = m & -m
            out.append(self.nodes[low.bit_length() - 1])
            m ^= low
        return out

    def out_mask(self, v: str) -> int:
        return self._out[self._check(v)]

    def in_mask(self, v: str) -> int:
        return self._in[self._check(v)]

    def forward_closure(self, start: int, allowed: int | None = None) -> int:
        """Nodes reachable from any node of ``start`` using only ``allowed`` nodes
        after the start (start nodes are always included)."""
        allowed = self.full_mask if allowed is None else allowed
        seen = start
        frontier = start
        out = self._out
        while frontier:
            nxt = 0
            m = frontier
            while m:
                low = m & -m
                nxt |= out[low.bit_length() - 1]
                m ^= low
            nxt &= allowed & ~seen
            seen |= nxt
            frontier = nxt
        return seen

    def backward_closure(self, start: int, allowed: int | None = None) -> int:
        allowed = self.full_mask if allowed is None else allowed
        seen = start
        frontier = start
        inn = self._in
        while frontier:
            nxt = 0
            m = frontier
            while m:
                low = m & -m
                nxt |= inn[low.bit_length() - 1]
                m ^= low
            nxt &= allowed & ~seen
            seen |= nxt
            frontier = nxt
        return seen

    def reaches(self, u: str, v: str, allowed: int | None = None) -> bool:
        """u ⇝ v inside ``allowed`` (both endpoints must be allowed; u ⇝ u holds)."""
        bu, bv = self.bit(u), self.bit(v)
        if allowed is not None and (not allowed & bu or not allowed & bv):
            return False
        return bool(self.forward_closure(bu, allowed) & bv)

    # -- derived networks ------------------------------------------------
    def with_gains(self, gains: Mapping[tuple[str, str], float]) -> "LayeredNetwork":
        missing = set(self.edges) - set(gains)
        if missing:
            raise NetworkError(f"no gain for edges {sorted(missing)}")
        return LayeredNetwork(
            self.layers, {e: gains[e] for e in self.edges}, self.s1, self.d1, self.s2, self.d2
        )

    def redraw(self, rng: np.random.Generator) -> "LayeredNetwork":
        """Same topology, fresh generic gains (edges drawn in sorted order)."""
        return self.with_gains({e: draw_gain(rng) for e in sorted(self.edges)})

    def swapped(self) -> "LayeredNetwork":
        """Exchange the roles of (s1, d1) and (s2, d2)."""
        return LayeredNetwork(self.layers, self.edges, self.s2, self.d2, self.s1, self.d1)

    def restricted(self, keep: Iterable[str]) -> "LayeredNetwork":
        keep = set(keep)
        layers = tuple(tuple(v for v in ids if v in keep) for ids in self.layers)
        edges = {(u, v): g for (u, v), g in self.edges.items() if u in keep and v in keep}
        return LayeredNetwork(layers, edges, self.s1, self.d1, self.s2, self.d2)


# -- construction helpers -------------------------------------------------------
def build_network(
    layers: Sequence[Sequence[str]],
    edges: Iterable[tuple],
    pairs: tuple[str, str, str, str],
    seed: int | None = None,
) -> LayeredNetwork:
    """Convenience constructor.  Edges are (tail, head) or (tail, head, gain);
    a missing gain or the string "rand" draws a generic gain from ``seed``."""
    rng = np.random.default_rng(0 if seed is None else seed)
    gains: dict[tuple[str, str], float] = {}
    for e in edges:
        u, v = e[0], e[1]
        g = e[2] if len(e) > 2 else "rand"
        if (u, v) in gains:
            raise NetworkError(f"duplicate edge ({u}, {v})")
        gains[(u, v)] = draw_gain(rng) if g == "rand" else float(g)
    s1, d1, s2, d2 = pairs
    return LayeredNetwork(tuple(tuple(x) for x in layers), gains, s1, d1, s2, d2)


def parse_network(text: str) -> LayeredNetwork:
    """Parse the line-oriented network format.

    Directives: ``layers <r>``, ``node <id> <layer>``, ``edge <tail> <head>
    <gain|rand>``, ``pairs <s1> <d1> <s2> <d2>`` and optional ``seed <u64>``.
    ``#`` starts a comment.  ``rand`` gains are drawn in file order from the
    declared seed (0 when absent).
    """
    r = None
    node_layer: dict[str, int] = {}
    order: list[str] = []
    edge_lines: list[tuple[int, str, str, str]] = []
    pairs = None
    seed = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kw, args = tok[0], tok[1:]
        if kw == "layers":
            if len(args) != 1 or not args[0].isdigit() or int(args[0]) < 2:
                raise ParseError(lineno, "expected 'layers <r>' with r >= 2")
            r = int(args[0])
        elif kw == "node":
            if len(args) != 2 or not args[1].lstrip("-").isdigit():
                raise ParseError(lineno, "expected 'node <id> <layer>'")
            if args[0] in node_layer:
                raise ParseError(lineno, f"duplicate node id {args[0]!r}")
            node_layer[args[0]] = int(args[1])
            order.append(args[0])
        elif kw == "edge":
            if len(args) != 3:
                raise ParseError(lineno, "expected 'edge <tail> <head> <gain|rand>'")
            edge_lines.append((lineno, *args))
        elif kw == "pairs":
            if len(args) != 4:
                raise ParseError(lineno, "expected 'pairs <s1> <d1> <s2> <d2>'")
            pairs = tuple(args)
        elif kw == "seed":
            if len(args) != 1 or not args[0].isdigit() or int(args[0]) >= 2**64:
                raise ParseError(lineno, "expected 'seed <u64>'")
            seed = int(args[0])
        else:
            raise ParseError(lineno, f"unknown directive {kw!r}")
    if r is None:
        raise ParseError(0, "missing 'layers' directive")
    if pairs is None:
        raise ParseError(0, "missing 'pairs' directive")
    for v, j in node_layer.items():
        if not 1 <= j <= r:
            raise ParseError(0, f"node {v!r} has layer {j} outside [1, {r}]")
    rng = np.random.default_rng(seed)
    gains: dict[tuple[str, str], float] = {}
    for lineno, u, v, g in edge_lines:
        for x in (u, v):
            if x not in node_layer:
                raise ParseError(lineno, f"dangling edge endpoint {x!r}")
        if (u, v) in gains:
            raise ParseError(lineno, f"duplicate edge ({u}, {v})")
        if node_layer[v] != node_layer[u] + 1:
            raise ParseError(lineno, f"edge ({u}, {v}) does not join consecutive layers")
        if g == "rand":
            val = draw_gain(rng)
        else:
            try:
                val = float(g)
            except ValueError:
                raise ParseError(lineno, f"bad gain {g!r}") from None
            if val == 0.0 or not np.isfinite(val):
                raise ParseError(lineno, "stored edges carry nonzero gain")
        gains[(u, v)] = val
    layers = [[v for v in order if node_layer[v] == j] for j in range(1, r + 1)]
    try:
        return LayeredNetwork(tuple(map(tuple, layers)), gains, *pairs)
    except NetworkError as exc:
        raise ParseError(0, str(exc)) from None


def serialize_network(net: LayeredNetwork) -> str:
    lines = [f"layers {net.r}"]
    for j, ids in enumerate(net.layers, start=1):
        lines += [f"node {v} {j}" for v in ids]
    for u in net.nodes:
        for v in net.succ[u]:
            lines.append(f"edge {u} {v} {net.edges[(u, v)]!r}")
    lines.append(f"pairs {net.s1} {net.d1} {net.s2} {net.d2}")
    return "\n".join(lines) + "\n"


# -- validation ---------------------------------------------------------------------
@dataclass
class ValidationReport:
    valid: bool
    layering_violations: list
    off_path: list
    pruned: LayeredNetwork
    disconnected_pairs: list
    warnings: list


def prune(net: LayeredNetwork) -> LayeredNetwork:
    """Drop every node that is not on some path s_i ⇝ d_j."""
    fwd = net.forward_closure(net.mask(net.sources))
    bwd = net.backward_closure(net.mask(net.destinations))
    keep = fwd & bwd | net.mask(net.terminals)
    if keep == net.full_mask:
        return net
    return net.restricted(net.members(keep))


def validate(net: LayeredNetwork) -> ValidationReport:
    bad_edges = [e for e in net.edges if net.layer[e[1]] != net.layer[e[0]] + 1]
    pruned = prune(net)
    off = [v for v in net.nodes if v not in pruned]
    warns = []
    if off:
        warns.append(f"pruned off-path nodes: {', '.join(off)}")
        log.warning(warns[-1])
    disc = [i for i in (1, 2) if not pruned.reaches(pruned.source(i), pruned.dest(i))]
    for i in disc:
        warns.append(f"s{i} does not reach d{i}")
    return ValidationReport(
        valid=not bad_edges and not disc,
        layering_violations=bad_edges,
        off_path=off,
        pruned=pruned,
        disconnected_pairs=disc,
        warnings=warns,
    )


# -- reachability and subnetworks ---------------------------------------------------
def reachable(net: LayeredNetwork, u: str, v: str) -> bool:
    return net.reaches(u, v)


def induced_subnetwork(net: LayeredNetwork, S: Iterable[str]) -> LayeredNetwork:
    S = set(S)
    missing = [t for t in net.terminals if t not in S]
    if missing:
        raise NetworkError(f"subset must contain every terminal, missing {missing}")
    for v in S:
        net._check(v)
    return net.restricted(S)


# -- paths ----------------------------------------------------------------------------
def check_path(net: LayeredNetwork, p: Sequence[str]) -> Path:
    if not p:
        raise NetworkError("empty path")
    for a, b in zip(p, p[1:]):
        if (a, b) not in net.edges:
            raise NetworkError(f"({a}, {b}) is not an edge")
    return tuple(p)


def path_slice(p: Sequence[str], start: str, end: str) -> Path:
    """P[start, end], inclusive."""
    try:
        i, j = p.index(start), p.index(end)
    except ValueError:
        raise NetworkError("slice bound not on path") from None
    if i > j:
        raise NetworkError("slice bounds out of order")
    return tuple(p[i : j + 1])


def path_concat(p: Sequence[str], q: Sequence[str]) -> Path:
    """p ⊕ q; the last node of p must equal the first node of q."""
    if not p or not q or p[-1] != q[0]:
        raise NetworkError("concatenation endpoints mismatch")
    return tuple(p) + tuple(q[1:])


def iter_paths(
    net: LayeredNetwork, u: str, v: str, allowed: int | None = None, limit: int | None = None
) -> Iterator[Path]:
    """All u ⇝ v paths inside ``allowed`` in lexicographic layer-order DFS.

    ``limit`` caps the number yielded; completeness needs limit ≥ Π|V_j|.
    """
    allowed = net.full_mask if allowed is None else allowed
    if not allowed & net.bit(u) or not allowed & net.bit(v):
        return
    live = net.backward_closure(net.bit(v), allowed)
    if not live & net.bit(u):
        return
    target_layer = net.layer[v]
    count = 0
    stack = [(u,)]
    while stack:
        p = stack.pop()
        last = p[-1]
        if last == v:
            yield p
            count += 1
            if limit is not None and count >= limit:
                return
            continue
        if net.layer[last] >= target_layer:
            continue
        for w in reversed(net.succ[last]):
            if live & net.bit(w):
                stack.append(p + (w,))


def path_mask(net: LayeredNetwork, p: Iterable[str]) -> int:
    return net.mask(p)


def _layer_pair_search(
    net: LayeredNetwork,
    ends1: tuple[str, str],
    ends2: tuple[str, str],
    allowed1: int,
    allowed2: int,
    via1: dict,
    via2: dict,
):
    """Dynamic program over layers for two vertex-disjoint paths.

    Two paths in a layered graph are disjoint iff they never occupy the same
    node in any layer, so a state is the pair of current nodes (None when a
    path is not active at that layer).
    """
    a1, b1 = ends1
    a2, b2 = ends2
    L = net.layer
    if L[a1] > L[b1] or L[a2] > L[b2]:
        return None
    if a1 == a2 or b1 == b2:
        return None
    lo, hi = min(L[a1], L[a2]), max(L[b1], L[b2])

    def options(k, layer, prev):
        a, b, allowed, via = (a1, b1, allowed1, via1) if k == 1 else (a2, b2, allowed2, via2)
        if layer < L[a] or layer > L[b]:
            return (None,)
        if layer == L[a]:
            cands = (a,)
        else:
            cands = net.succ[prev]
        if layer == L[b]:
            cands = tuple(c for c in cands if c == b)
        if layer in via:
            cands = tuple(c for c in cands if c == via[layer])
        return tuple(c for c in cands if allowed & net.bit(c))

    frontier = {(None, None): None}
    history = []
    for layer in range(lo, hi + 1):
        nxt = {}
        for (x1, x2) in frontier:
            for y1 in options(1, layer, x1):
                for y2 in options(2, layer, x2):
                    if y1 is not None and y1 == y2:
                        continue
                    if (y1, y2) not in nxt:
                        nxt[(y1, y2)] = (x1, x2)
        if not nxt:
            return None
        history.append(nxt)
        frontier = nxt
    # backtrack from the unique final state
    state = next(iter(frontier))
    p1, p2 = [], []
    for nxt in reversed(history):
        x1, x2 = state
        if x1 is not None:
            p1.append(x1)
        if x2 is not None:
            p2.append(x2)
        state = nxt[state]
    return tuple(reversed(p1)), tuple(reversed(p2))


def disjoint_pair(
    net: LayeredNetwork,
    ends1: tuple[str, str],
    ends2: tuple[str, str],
    allowed1: int | None = None,
    allowed2: int | None = None,
    via1: Iterable[str] = (),
    via2: Iterable[str] = (),
):
    """Vertex-disjoint paths ends1[0] ⇝ ends1[1] and ends2[0] ⇝ ends2[1] with
    node restrictions and required pass-through nodes, or None."""
    full = net.full_mask
    via1, via2 = tuple(via1), tuple(via2)
    v1 = {net.layer[w]: w for w in via1}
    v2 = {net.layer[w]: w for w in via2}
    if len(v1) != len(via1) or len(v2) != len(via2):
        return None
    return _layer_pair_search(
        net,
        ends1,
        ends2,
        full if allowed1 is None else allowed1,
        full if allowed2 is None else allowed2,
        v1,
        v2,
    )


def _split_graph(net: LayeredNetwork, allowed: int) -> nx.DiGraph:
    g = nx.DiGraph()
    for v in net.members(allowed):
        g.add_edge((v, "in"), (v, "out"), capacity=1)
    for (u, v) in net.edges:
        if allowed & net.bit(u) and allowed & net.bit(v):
            g.add_edge((u, "out"), (v, "in"), capacity=1)
    return g


def disjoint_flow_paths(
    net: LayeredNetwork, srcs: Iterable[str], dsts: Iterable[str], allowed: int | None = None
) -> list[Path]:
    """Maximum set of vertex-disjoint paths from ``srcs`` to ``dsts`` (any
    pairing) via node-split max-flow."""
    allowed = net.full_mask if allowed is None else allowed
    srcs = [s for s in srcs if allowed & net.bit(s)]
    dsts = [d for d in dsts if allowed & net.bit(d)]
    if not srcs or not dsts:
        return []
    g = _split_graph(net, allowed)
    for s in srcs:
        g.add_edge("SRC", (s, "in"), capacity=1)
    for d in dsts:
        g.add_edge((d, "out"), "DST", capacity=1)
    _, flow = nx.maximum_flow(g, "SRC", "DST")
    paths = []
    for s in srcs:
        if flow["SRC"].get((s, "in"), 0) < 1:
            continue
        p = [s]
        cur = (s, "out")
        while True:
            nxt = next((w for w, f in flow[cur].items() if f >= 1), None)
            if nxt is None or nxt == "DST":
                break
            p.append(nxt[0])
            cur = (nxt[0], "out")
        paths.append(tuple(p))
    return paths


def find_disjoint_paths(
    net: LayeredNetwork,
    src_pair: tuple[str, str],
    dst_pair: tuple[str, str],
    any_pairing: bool = False,
):
    """Vertex-disjoint src_pair[0] ⇝ dst_pair[0] and src_pair[1] ⇝ dst_pair[1].

    The max-flow value between the merged endpoint sets decides existence for
    an unordered pairing.  With ``any_pairing`` the flow decomposition is
    returned as is (ordered by source); otherwise the ordered pairing is
    resolved by the layer-pair dynamic program.
    """
    for v in (*src_pair, *dst_pair):
        net._check(v)
    flow = disjoint_flow_paths(net, src_pair, dst_pair)
    if len(flow) < 2:
        return None
    if any_pairing:
        by_src = {p[0]: p for p in flow}
        return by_src[src_pair[0]], by_src[src_pair[1]]
    ends = {(p[0], p[-1]) for p in flow}
    if ends == {(src_pair[0], dst_pair[0]), (src_pair[1], dst_pair[1])}:
        by_src = {p[0]: p for p in flow}
        return by_src[src_pair[0]], by_src[src_pair[1]]
    return disjoint_pair(net, (src_pair[0], dst_pair[0]), (src_pair[1], dst_pair[1]))


# -- extended network ---------------------------------------------------------------
@dataclass(frozen=True)
class ExtendedNetwork:
    network: LayeredNetwork
    origin: dict  # node of the extension -> node of the original network
    copy_of: dict  # original node -> its primed copy

    def lift_path(self, p: Sequence[str]) -> Path:
        """Collapse a path of the extension onto the original network."""
        out: list[str] = []
        for v in p:
            o = self.origin[v]
            if not out or out[-1] != o:
                out.append(o)
        return tuple(out)


def extend_network(net: LayeredNetwork) -> ExtendedNetwork:
    """Split every layer V_j into V_j, V_j' with a unit edge v -> v' and hang
    the original inter-layer edges from V_j' to V_{j+1}.  The extension's
    destinations are the primed copies d1', d2'."""
    copy_of = {}
    taken = set(net.nodes)
    for v in net.nodes:
        c = v + "'"
        while c in taken:
            c += "'"
        taken.add(c)
        copy_of[v] = c
    layers = []
    for ids in net.layers:
        layers.append(ids)
        layers.append(tuple(copy_of[v] for v in ids))
    edges = {(v, copy_of[v]): 1.0 for v in net.nodes}
    for (u, v), g in net.edges.items():
        edges[(copy_of[u], v)] = g
    ext = LayeredNetwork(
        tuple(layers), edges, net.s1, copy_of[net.d1], net.s2, copy_of[net.d2]
    )
    origin = {v: v for v in net.nodes}
    origin.update({c: v for v, c in copy_of.items()})
    return ExtendedNetwork(ext, origin, copy_of)
