"""Random graph factories and brute-force oracles shared by the tests."""

from __future__ import annotations

import itertools

import numpy as np

from fiedlerkit.graph import Graph, build_graph


def random_graph(rng, n: int, p: float) -> Graph:
    pairs = [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < p]
    return build_graph(pairs, n)


def random_connected_graph(rng, n: int, extra_p: float = 0.1) -> Graph:
    """Random spanning tree plus Erdos-Renyi extras."""
    order = rng.permutation(n)
    pairs = {tuple(sorted((int(order[k]), int(order[rng.integers(k)])))) for k in range(1, n)}
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < extra_p:
            pairs.add((i, j))
    return build_graph(sorted(pairs), n)


def random_multi_component_graph(rng, max_n: int = 60, min_parts: int = 2):
    """Disjoint union of connected pieces (singletons allowed). Returns (graph, part count)."""
    parts = int(rng.integers(min_parts, 7))
    sizes = rng.integers(1, max(2, max_n // parts) + 1, size=parts)
    pairs, offset = [], 0
    for size in sizes:
        piece = random_connected_graph(rng, int(size), float(rng.uniform(0, 0.4)))
        pairs.extend((int(a) + offset, int(b) + offset) for a, b in piece.edges)
        offset += int(size)
    # shuffle labels so components are not contiguous ranges
    perm = rng.permutation(offset)
    pairs = [(int(perm[a]), int(perm[b])) for a, b in pairs]
    return build_graph(pairs, offset), parts


def floyd_warshall(g: Graph) -> np.ndarray:
    n = g.node_count
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0)
    for a, b in g.edges:
        d[a, b] = d[b, a] = 1
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


def union_find_components(g: Graph) -> int:
    parent = list(range(g.node_count))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in g.edges:
        parent[find(int(a))] = find(int(b))
    return len({find(x) for x in range(g.node_count)})


# one "PASS|FAIL [n] text" line per acceptance criterion, printed at session end
ACCEPTANCE_LINES: list[str] = []
