"""Seeded random layered networks for the property and oracle suites."""
from __future__ import annotations

import numpy as np

from .netmodel import LayeredNetwork, draw_gain, prune


def random_network(
    seed: int,
    min_layers: int = 3,
    max_layers: int = 6,
    max_width: int = 4,
    edge_prob: float = 0.5,
    max_nodes: int | None = None,
    max_tries: int = 1000,
) -> LayeredNetwork:
    """Random layered network with generic gains, pruned to nodes on some
    source-destination path, with s1 ⇝ d1 and s2 ⇝ d2.  Rejected draws are
    resampled from the same stream, so the result depends only on the seed."""
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        r = int(rng.integers(min_layers, max_layers + 1))
        layers = [["s1", "s2"]]
        for j in range(2, r):
            w = int(rng.integers(1, max_width + 1))
            layers.append([f"n{j}_{k}" for k in range(w)])
        layers.append(["d1", "d2"])
        edges = {}
        for a, b in zip(layers, layers[1:]):
            for u in a:
                for v in b:
                    if rng.random() < edge_prob:
                        edges[(u, v)] = draw_gain(rng)
        net = LayeredNetwork(tuple(map(tuple, layers)), edges, "s1", "d1", "s2", "d2")
        if not (net.reaches("s1", "d1") and net.reaches("s2", "d2")):
            continue
        net = prune(net)
        if max_nodes is not None and len(net.nodes) > max_nodes:
            continue
        return net
    raise RuntimeError(f"no admissible network after {max_tries} draws (seed {seed})")


def suite(n: int, base_seed: int = 0, **kw) -> list[LayeredNetwork]:
    return [random_network(base_seed + k, **kw) for k in range(n)]
