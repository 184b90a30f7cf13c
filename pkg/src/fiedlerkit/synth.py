"""Planted-class synthetic graphs with Gaussian node features, and seeded edge removal."""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field

import numpy as np

from .graph import Graph

DEFAULT_CLASS_PARAMS = ((250.0, 50.0), (100.0, 90.0), (400.0, 200.0))


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a planted-class graph.

    ``class_params`` are ``(mean, stddev)`` pairs; every feature column of a
    node is drawn independently from its class's normal distribution. Each
    sampled edge joins two same-class nodes with probability
    ``intra_class_edge_fraction``.
    """

    node_count: int
    feature_dim: int
    target_edge_count: int
    class_params: tuple = field(default=DEFAULT_CLASS_PARAMS)
    intra_class_edge_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "class_params",
                           tuple((float(m), float(s)) for m, s in self.class_params))
        if self.node_count < 1 or self.feature_dim < 1:
            raise ValueError("node_count and feature_dim must be positive")
        if not self.class_params:
            raise ValueError("class_params must be non-empty")
        if any(s <= 0 for _, s in self.class_params):
            raise ValueError("class stddevs must be positive")
        if not 0.0 <= self.intra_class_edge_fraction <= 1.0:
            raise ValueError("intra_class_edge_fraction must be in [0, 1]")
        max_edges = self.node_count * (self.node_count - 1) // 2
        if not 0 <= self.target_edge_count <= max_edges:
            raise ValueError(
                f"target_edge_count {self.target_edge_count} infeasible for "
                f"{self.node_count} nodes (max {max_edges})"
            )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["class_params"] = [list(p) for p in self.class_params]
        return d


def _decode_pair(k: np.ndarray, size: int):
    """Map linear indices over the strict upper triangle of a ``size x size`` matrix to (i, j)."""
    # row i starts at offset i*size - i*(i+1)/2
    i = (2 * size - 1 - np.sqrt((2 * size - 1) ** 2 - 8 * k.astype(np.float64))) // 2
    i = i.astype(np.int64)
    start = i * size - i * (i + 1) // 2
    # guard against float rounding at row boundaries
    over = k < start
    i[over] -= 1
    start = i * size - i * (i + 1) // 2
    nxt = (i + 1) * size - (i + 1) * (i + 2) // 2
    under = k >= nxt
    i[under] += 1
    start = i * size - i * (i + 1) // 2
    j = k - start + i + 1
    return i, j


def _sample_intra(groups, count, rng):
    sizes = np.array([len(g) for g in groups], dtype=np.int64)
    pairs_per = sizes * (sizes - 1) // 2
    offsets = np.concatenate([[0], np.cumsum(pairs_per)])
    picks = np.sort(rng.choice(int(offsets[-1]), size=count, replace=False))
    out = []
    for c, members in enumerate(groups):
        mine = picks[(picks >= offsets[c]) & (picks < offsets[c + 1])] - offsets[c]
        if len(mine):
            i, j = _decode_pair(mine, len(members))
            out.append(np.stack([members[i], members[j]], axis=1))
    return np.concatenate(out) if out else np.empty((0, 2), dtype=np.int64)


def _sample_inter(labels, count, universe, rng):
    n = len(labels)
    if count == 0:
        return np.empty((0, 2), dtype=np.int64)
    if count > universe // 2:
        i, j = np.triu_indices(n, 1)
        keep = labels[i] != labels[j]
        cand = np.stack([i[keep], j[keep]], axis=1)
        return cand[np.sort(rng.choice(len(cand), size=count, replace=False))]
    chosen = set()
    out = []
    while len(out) < count:
        a = rng.integers(0, n, size=2 * (count - len(out)) + 8)
        b = rng.integers(0, n, size=len(a))
        for x, y in zip(a.tolist(), b.tolist()):
            if labels[x] == labels[y]:
                continue
            key = (x, y) if x < y else (y, x)
            if key in chosen:
                continue
            chosen.add(key)
            out.append(key)
            if len(out) == count:
                break
    return np.array(out, dtype=np.int64)


def generate(spec: SyntheticSpec) -> Graph:
    """Draw labels, features and exactly ``target_edge_count`` distinct edges from ``spec.seed``."""
    rng = np.random.default_rng(spec.seed)
    n, k = spec.node_count, len(spec.class_params)
    labels = np.arange(n) % k
    labels = labels[rng.permutation(n)]

    means = np.array([m for m, _ in spec.class_params])[labels]
    stds = np.array([s for _, s in spec.class_params])[labels]
    features = means[:, None] + stds[:, None] * rng.standard_normal((n, spec.feature_dim))

    groups = [np.flatnonzero(labels == c) for c in range(k)]
    intra_universe = sum(len(g) * (len(g) - 1) // 2 for g in groups)
    inter_universe = n * (n - 1) // 2 - intra_universe
    m = spec.target_edge_count
    n_intra = int(rng.binomial(m, spec.intra_class_edge_fraction))
    # shift the split if either side cannot hold its draw
    n_intra = min(n_intra, intra_universe)
    n_intra = max(n_intra, m - inter_universe)
    if spec.intra_class_edge_fraction == 1.0 and n_intra < m:
        raise ValueError(f"only {intra_universe} same-class pairs exist; cannot place {m} edges")
    if spec.intra_class_edge_fraction == 0.0 and m - n_intra > inter_universe:
        raise ValueError(f"only {inter_universe} cross-class pairs exist; cannot place {m} edges")

    intra = _sample_intra(groups, n_intra, rng)
    inter = _sample_inter(labels, m - n_intra, inter_universe, rng)
    edges = np.concatenate([intra, inter]).reshape(-1, 2)
    edges = np.sort(edges, axis=1)
    edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
    return Graph(n, edges, features, labels)


def _edge_priority(seed: int, edges: np.ndarray) -> np.ndarray:
    """Seeded pseudo-random priority that depends only on the edge itself."""
    key = int(seed).to_bytes(8, "little", signed=True)
    out = np.empty(len(edges), dtype=np.uint64)
    for idx, (i, j) in enumerate(edges.tolist()):
        h = hashlib.blake2b(f"{i},{j}".encode(), digest_size=8, key=key)
        out[idx] = int.from_bytes(h.digest(), "little")
    return out


def remove_edges(g: Graph, target_edge_count: int, seed: int = 0) -> Graph:
    """Keep a seeded uniformly random subset of ``target_edge_count`` edges.

    Each edge gets a priority derived from ``(seed, edge)``, and the lowest
    priorities survive, so removals with the same seed are nested: cutting to
    500 and then to 250 keeps the same edges as cutting to 250 directly.
    """
    if target_edge_count < 0 or target_edge_count > g.edge_count:
        raise ValueError(f"cannot keep {target_edge_count} of {g.edge_count} edges")
    if target_edge_count == g.edge_count:
        return g
    prio = _edge_priority(seed, g.edges)
    keep = np.sort(np.argsort(prio, kind="stable")[:target_edge_count])
    return g.with_edges(g.edges[keep])
