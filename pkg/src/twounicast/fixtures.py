"""Small named networks used by the tests, the CLI and the documentation.

Each fixture is stored in the text format so the parser is exercised too.
Gains marked ``rand`` come from the fixture's seed.
"""
from __future__ import annotations

from .netmodel import LayeredNetwork, parse_network

PAR = """
# two parallel chains, no cross edges
layers 3
node s1 1
node s2 1
node a 2
node b 2
node d1 3
node d2 3
edge s1 a 1
edge a d1 1
edge s2 b 1
edge b d2 1
pairs s1 d1 s2 d2
"""

BOTTLE = """
# every source/destination edge goes through m
layers 3
node s1 1
node s2 1
node m 2
node d1 3
node d2 3
edge s1 m rand
edge s2 m rand
edge m d1 rand
edge m d2 rand
pairs s1 d1 s2 d2
seed 7
"""

FULL222 = """
# fully connected 2x2x2 network
layers 3
node s1 1
node s2 1
node u1 2
node u2 2
node d1 3
node d2 3
edge s1 u1 rand
edge s1 u2 rand
edge s2 u1 rand
edge s2 u2 rand
edge u1 d1 rand
edge u1 d2 rand
edge u2 d1 rand
edge u2 d2 rand
pairs s1 d1 s2 d2
seed 222
"""

ZNET = """
# two-hop Z network: b also feeds d1
layers 3
node s1 1
node s2 1
node a 2
node b 2
node d1 3
node d2 3
edge s1 a rand
edge a d1 rand
edge s2 b rand
edge b d2 rand
edge b d1 rand
pairs s1 d1 s2 d2
seed 3
"""

# Edge i carries gain h_i; see COND_LABELS.  Pair 1 runs s1 u1 v2 w1 d1 and
# pair 2 runs s2 u2 v1 w2 d2; v3 collects s2's interference for w1.
COND = """
layers 5
node s1 1
node s2 1
node u1 2
node u2 2
node v1 3
node v2 3
node v3 3
node w1 4
node w2 4
node d1 5
node d2 5
edge s1 u1 rand
edge s2 u1 rand
edge s2 u2 rand
edge u1 v2 rand
edge u2 v1 rand
edge v1 w2 rand
edge u1 v3 rand
edge u2 v3 rand
edge v2 w1 rand
edge v3 w1 rand
edge w1 d1 rand
edge w2 d2 rand
pairs s1 d1 s2 d2
seed 6
"""

COND_LABELS = {
    1: ("s1", "u1"),
    2: ("s2", "u1"),
    3: ("s2", "u2"),
    4: ("u1", "v2"),
    5: ("u2", "v1"),
    6: ("v1", "w2"),
    7: ("u1", "v3"),
    8: ("u2", "v3"),
    9: ("v2", "w1"),
    10: ("v3", "w1"),
    11: ("w1", "d1"),
    12: ("w2", "d2"),
}

EX1 = """
# P11 = s1 v1 v2 v3 d1, P22 = s2 v7 v8 v9 d2
layers 5
node s1 1
node s2 1
node v1 2
node v4 2
node v7 2
node v2 3
node v5 3
node v6 3
node v8 3
node v3 4
node v9 4
node d1 5
node d2 5
edge s1 v1 rand
edge v1 v2 rand
edge v2 v3 rand
edge v3 d1 rand
edge s2 v7 rand
edge v7 v8 rand
edge v8 v9 rand
edge v9 d2 rand
edge s2 v4 rand
edge v4 v5 rand
edge v5 v3 rand
edge v7 v2 rand
edge v1 v6 rand
edge v6 v9 rand
pairs s1 d1 s2 d2
seed 1
"""

# Chains a2..a5 (pair 1) and b2..b5 (pair 2).  b2 -> v6 -> v2 feeds both
# chains late; b3 -> a4 is the single direct edge.
C1 = """
layers 6
node s1 1
node s2 1
node a2 2
node b2 2
node a3 3
node b3 3
node v6 3
node a4 4
node b4 4
node v2 4
node a5 5
node b5 5
node d1 6
node d2 6
edge s1 a2 rand
edge a2 a3 rand
edge a3 a4 rand
edge a4 a5 rand
edge a5 d1 rand
edge s2 b2 rand
edge b2 b3 rand
edge b3 b4 rand
edge b4 b5 rand
edge b5 d2 rand
edge a2 v6 rand
edge b2 v6 rand
edge v6 v2 rand
edge v2 a5 rand
edge v2 b5 rand
edge b3 a4 rand
pairs s1 d1 s2 d2
seed 11
"""

# Same as C1 but the direct edge sits after the shared relay (b4 -> a5).
C1_LATE = C1.replace("edge b3 a4 rand", "edge b4 a5 rand").replace("seed 11", "seed 12")

# Q path q2..q4 and Z path z2..z4 for pair 1, chain b2..b4 for pair 2.
# b2 -> z3 is the edge (v2, v1); q2 -> b3 is the edge (v3, v4).
C2 = """
layers 5
node s1 1
node s2 1
node q2 2
node z2 2
node b2 2
node q3 3
node z3 3
node b3 3
node q4 4
node z4 4
node b4 4
node d1 5
node d2 5
edge s1 q2 rand
edge q2 q3 rand
edge q3 q4 rand
edge q4 d1 rand
edge s1 z2 rand
edge z2 z3 rand
edge z3 z4 rand
edge z4 d1 rand
edge s2 b2 rand
edge b2 b3 rand
edge b3 b4 rand
edge b4 d2 rand
edge b2 z3 rand
edge q2 b3 rand
pairs s1 d1 s2 d2
seed 21
"""

# Edge (v3, v4) = (q3, b4) no earlier than v1 = z3.
C2_LATE = C2.replace("edge q2 b3 rand", "edge q3 b4 rand").replace("seed 21", "seed 22")

# Variant with v1 ⇝ v3: z3 -> q4 and the direct edge q4 -> b5.
C2_GRAIL = """
layers 6
node s1 1
node s2 1
node q2 2
node z2 2
node b2 2
node q3 3
node z3 3
node b3 3
node q4 4
node z4 4
node b4 4
node q5 5
node z5 5
node b5 5
node d1 6
node d2 6
edge s1 q2 rand
edge q2 q3 rand
edge q3 q4 rand
edge q4 q5 rand
edge q5 d1 rand
edge s1 z2 rand
edge z2 z3 rand
edge z3 z4 rand
edge z4 z5 rand
edge z5 d1 rand
edge s2 b2 rand
edge b2 b3 rand
edge b3 b4 rand
edge b4 b5 rand
edge b5 d2 rand
edge b2 z3 rand
edge z3 q4 rand
edge q4 b5 rand
pairs s1 d1 s2 d2
seed 23
"""

BUTTERFLY = """
# u is shared by every direct path; c1, c2 carry the cross paths
layers 4
node s1 1
node s2 1
node a 2
node b 2
node c1 3
node u 3
node c2 3
node d1 4
node d2 4
edge s1 a rand
edge s2 b rand
edge a c1 rand
edge a u rand
edge b u rand
edge b c2 rand
edge u d1 rand
edge u d2 rand
edge c1 d2 rand
edge c2 d1 rand
pairs s1 d1 s2 d2
seed 9
"""

GRAIL = """
# P12 = s1 u1 v1 d2, P21 = s2 u2 v2 d1, s2 -> u1 -> v2 -> d2
layers 4
node s1 1
node s2 1
node u1 2
node u2 2
node v1 3
node v2 3
node d1 4
node d2 4
edge s1 u1 rand
edge s2 u1 rand
edge s2 u2 rand
edge u1 v1 rand
edge u1 v2 rand
edge u2 v2 rand
edge v1 d2 rand
edge v2 d1 rand
edge v2 d2 rand
pairs s1 d1 s2 d2
seed 10
"""

# s1's interference reaches d2 only through w0, whose three inputs are fed
# from layer 2; d1 is the first pair's key node, so two key layers are used.
TWOKEY = """
layers 4
node s1 1
node s2 1
node u0 2
node u1 2
node u2 2
node w0 3
node w1 3
node d1 4
node d2 4
edge s1 u1 rand
edge s1 u2 rand
edge s2 u0 rand
edge s2 u1 rand
edge s2 u2 rand
edge u0 w0 rand
edge u0 w1 rand
edge u1 w0 rand
edge u2 w0 rand
edge u2 w1 rand
edge w0 d1 rand
edge w0 d2 rand
edge w1 d1 rand
pairs s1 d1 s2 d2
seed 907
"""

# Both key nodes are the destinations; the single relay layer has three nodes.
THREECOL = """
layers 3
node s1 1
node s2 1
node u0 2
node u1 2
node u2 2
node d1 3
node d2 3
edge s1 u1 rand
edge s1 u2 rand
edge s2 u0 rand
edge s2 u1 rand
edge s2 u2 rand
edge u0 d1 rand
edge u0 d2 rand
edge u1 d1 rand
edge u1 d2 rand
edge u2 d1 rand
edge u2 d2 rand
pairs s1 d1 s2 d2
seed 88
"""

TEXTS = {
    "par": PAR,
    "bottle": BOTTLE,
    "222": FULL222,
    "z": ZNET,
    "cond": COND,
    "ex1": EX1,
    "c1": C1,
    "c1-late": C1_LATE,
    "c2": C2,
    "c2-late": C2_LATE,
    "c2-grail": C2_GRAIL,
    "butterfly": BUTTERFLY,
    "grail": GRAIL,
    "twokey": TWOKEY,
    "threecol": THREECOL,
}


def load(name: str) -> LayeredNetwork:
    return parse_network(TEXTS[name])


def cond_gain(net: LayeredNetwork, i: int) -> float:
    return net.edges[COND_LABELS[i]]
