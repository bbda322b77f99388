"""Shared test helpers: independent oracles and small random instances.

The brute-force edit distance here enumerates every injective assignment,
so it is exponentially slow but obviously correct; production code must
never import from this file.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np

from gedmatch.graphs import Graph, NodeMatching, edit_cost, orient_pair


def brute_force_ged(g1: Graph, g2: Graph) -> tuple[int, NodeMatching]:
    """Minimum edit cost over all injective node assignments, by enumeration."""
    a, b, swapped = orient_pair(g1, g2)
    best = None
    best_map = None
    for perm in permutations(range(b.node_count), a.node_count):
        m = NodeMatching.from_mapping(perm, b.node_count)
        c = edit_cost(a, b, m)
        if best is None or c < best:
            best, best_map = c, m
    assert best is not None
    if swapped:
        best_map = NodeMatching(best_map.entries.T)
    return best, best_map


def random_test_graph(rng: np.random.Generator, max_nodes: int = 8,
                      n_labels: int = 3, density: float = 0.4) -> Graph:
    """Small random labeled graph; connectivity is not guaranteed."""
    n = int(rng.integers(1, max_nodes + 1))
    labels = rng.integers(0, n_labels, size=n)
    edges = [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < density]
    return Graph.make(labels, edges)


def random_valid_matching(rng: np.random.Generator, rows: int, cols: int) -> NodeMatching:
    cols_pick = rng.permutation(cols)[:rows]
    return NodeMatching.from_mapping(cols_pick, cols)


def rel_err(approx: float, exact: float, floor: float = 1e-6) -> float:
    return abs(approx - exact) / max(abs(approx), abs(exact), floor)
