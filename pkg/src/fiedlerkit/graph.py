"""Undirected simple graphs, Laplacians, components and BFS distances."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

UNREACHABLE = -1


class GraphDomainError(ValueError):
    """Raised when an operation needs a property the graph lacks (e.g. connectivity)."""


def _frozen(arr):
    if arr is None:
        return None
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on nodes ``0..node_count-1``.

    ``edges`` is an ``(E, 2)`` integer array of canonical pairs ``i < j`` in
    lexicographic order. Use :func:`build_graph` rather than constructing
    this directly; the constructor only validates.
    """

    node_count: int
    edges: np.ndarray
    features: np.ndarray | None = None
    labels: np.ndarray | None = None
    _adj: sp.csr_matrix | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError("node_count must be >= 1")
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= self.node_count:
                raise IndexError("edge endpoint out of range")
            if np.any(edges[:, 0] >= edges[:, 1]):
                raise ValueError("edges must be canonical pairs i < j (no self-loops)")
            if len(np.unique(edges, axis=0)) != len(edges):
                raise ValueError("duplicate edges")
        object.__setattr__(self, "edges", _frozen(edges))
        if self.features is not None:
            feats = np.asarray(self.features, dtype=np.float64)
            if feats.ndim != 2 or feats.shape[0] != self.node_count:
                raise ValueError(
                    f"feature matrix must have {self.node_count} rows, got shape {feats.shape}"
                )
            object.__setattr__(self, "features", _frozen(feats))
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
            if labels.shape[0] != self.node_count:
                raise ValueError("labels must have one entry per node")
            object.__setattr__(self, "labels", _frozen(labels))

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency in CSR form (cached)."""
        if self._adj is None:
            n = self.node_count
            i, j = self.edges[:, 0], self.edges[:, 1]
            data = np.ones(2 * len(i))
            adj = sp.csr_matrix(
                (data, (np.concatenate([i, j]), np.concatenate([j, i]))), shape=(n, n)
            )
            adj.sort_indices()
            object.__setattr__(self, "_adj", adj)
        return self._adj

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.node_count)

    @property
    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.node_count else 0

    def neighbors(self) -> list[np.ndarray]:
        adj = self.adjacency()
        return [adj.indices[adj.indptr[v]:adj.indptr[v + 1]] for v in range(self.node_count)]

    def subgraph(self, nodes) -> Graph:
        """Induced subgraph on ``nodes`` (relabelled in the given order)."""
        nodes = np.asarray(nodes, dtype=np.int64)
        index = np.full(self.node_count, -1, dtype=np.int64)
        index[nodes] = np.arange(len(nodes))
        mapped = index[self.edges]
        keep = (mapped >= 0).all(axis=1)
        return build_graph(
            mapped[keep],
            len(nodes),
            features=None if self.features is None else self.features[nodes],
            labels=None if self.labels is None else self.labels[nodes],
        )

    def with_edges(self, edges) -> Graph:
        return Graph(self.node_count, edges, self.features, self.labels)

    def same_as(self, other: Graph) -> bool:
        """Exact equality of node count, edges, features and labels."""

        def eq(a, b):
            if a is None or b is None:
                return a is None and b is None
            return a.shape == b.shape and np.array_equal(a, b)

        return (
            self.node_count == other.node_count
            and np.array_equal(self.edges, other.edges)
            and eq(self.features, other.features)
            and eq(self.labels, other.labels)
        )


@dataclass(frozen=True)
class ComponentDecomposition:
    component_id: np.ndarray
    component_sizes: list[int]

    @property
    def component_count(self) -> int:
        return len(self.component_sizes)

    def members(self, cid: int) -> np.ndarray:
        return np.flatnonzero(self.component_id == cid)


def canonical_edges(edge_pairs, node_count: int) -> np.ndarray:
    pairs = np.asarray(edge_pairs, dtype=np.int64).reshape(-1, 2)
    if pairs.size and (pairs.min() < 0 or pairs.max() >= node_count):
        bad = pairs[(pairs < 0).any(axis=1) | (pairs >= node_count).any(axis=1)][0]
        raise IndexError(f"edge {tuple(int(x) for x in bad)} out of range for {node_count} nodes")
    pairs = np.sort(pairs, axis=1)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    if not len(pairs):
        return np.empty((0, 2), dtype=np.int64)
    return np.unique(pairs, axis=0)


def build_graph(edge_pairs, node_count: int, features=None, labels=None) -> Graph:
    """Symmetrize, deduplicate and drop self-loops; isolated nodes are kept."""
    if node_count < 1:
        raise ValueError("node_count must be >= 1")
    return Graph(node_count, canonical_edges(edge_pairs, node_count), features, labels)


def laplacian(g: Graph, sparse: bool = False):
    """Combinatorial Laplacian ``D - A``."""
    adj = g.adjacency()
    lap = sp.diags(np.asarray(adj.sum(axis=1)).ravel()) - adj
    if sparse:
        return sp.csr_matrix(lap)
    return lap.toarray()


def connected_components(g: Graph) -> ComponentDecomposition:
    """Label components by BFS; ids ascend with each component's smallest node."""
    nbrs = g.neighbors()
    comp = np.full(g.node_count, -1, dtype=np.int64)
    sizes = []
    for start in range(g.node_count):
        if comp[start] >= 0:
            continue
        cid = len(sizes)
        comp[start] = cid
        queue = deque([start])
        size = 0
        while queue:
            v = queue.popleft()
            size += 1
            for w in nbrs[v]:
                if comp[w] < 0:
                    comp[w] = cid
                    queue.append(w)
        sizes.append(size)
    return ComponentDecomposition(comp, sizes)


def bfs_distances(g: Graph, source: int, nbrs=None) -> np.ndarray:
    if not 0 <= source < g.node_count:
        raise IndexError(f"node {source} out of range")
    if nbrs is None:
        nbrs = g.neighbors()
    dist = np.full(g.node_count, UNREACHABLE, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in nbrs[v]:
            if dist[w] == UNREACHABLE:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def bfs_all_pairs(g: Graph) -> np.ndarray:
    """All-pairs hop distances; unreachable pairs hold ``UNREACHABLE`` (-1)."""
    nbrs = g.neighbors()
    return np.vstack([bfs_distances(g, s, nbrs) for s in range(g.node_count)])


def _require_connected(g: Graph, what: str) -> np.ndarray:
    dist = bfs_all_pairs(g)
    if (dist == UNREACHABLE).any():
        raise GraphDomainError(f"{what} is only defined for connected graphs")
    return dist


def mean_distance(g: Graph) -> float:
    """Average shortest-path length over unordered pairs of distinct nodes."""
    dist = _require_connected(g, "mean distance")
    n = g.node_count
    if n < 2:
        raise GraphDomainError("mean distance needs at least two nodes")
    return float(np.triu(dist, 1).sum()) / (n * (n - 1) / 2)


def diameter(g: Graph) -> int:
    return int(_require_connected(g, "diameter").max())


# --- edge-list text format -------------------------------------------------


def read_edge_list(path) -> Graph:
    """Read whitespace-separated 0-based pairs; ``#`` comments, optional ``n <count>`` header."""
    declared = None
    pairs = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "n":
                if len(parts) != 2 or declared is not None:
                    raise ValueError(f"{path}:{lineno}: bad node-count header")
                declared = int(parts[1])
                continue
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two node indices, got {line!r}")
            try:
                pairs.append((int(parts[0]), int(parts[1])))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if declared is None:
        if not pairs:
            raise ValueError(f"{path}: empty edge list and no 'n <count>' header")
        declared = max(max(p) for p in pairs) + 1
    return build_graph(pairs, declared)


def write_edge_list(g: Graph, path) -> None:
    lines = [f"n {g.node_count}"]
    lines += [f"{i} {j}" for i, j in g.edges.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")
