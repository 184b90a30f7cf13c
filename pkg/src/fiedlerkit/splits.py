"""Train/validation/test node masks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

SPLIT_NAMES = ("train", "val", "test")


@dataclass(frozen=True, eq=False)
class Split:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        masks = [np.asarray(m, dtype=bool) for m in (self.train, self.val, self.test)]
        if len({m.shape for m in masks}) != 1:
            raise ValueError("split masks must have equal length")
        for name, m in zip(SPLIT_NAMES, masks):
            if not m.any():
                raise ValueError(f"{name} mask is empty")
            object.__setattr__(self, name, m)
        if (masks[0] & masks[1]).any() or (masks[0] & masks[2]).any() or (masks[1] & masks[2]).any():
            raise ValueError("split masks overlap")

    @property
    def node_count(self) -> int:
        return len(self.train)

    def sizes(self) -> tuple[int, int, int]:
        return int(self.train.sum()), int(self.val.sum()), int(self.test.sum())

    @classmethod
    def from_indices(cls, n, train, val, test):
        masks = []
        for idx in (train, val, test):
            m = np.zeros(n, dtype=bool)
            m[np.asarray(idx, dtype=np.int64)] = True
            masks.append(m)
        return cls(*masks)


def _controlled_rounding(targets: np.ndarray) -> np.ndarray:
    """Round a nonnegative table to floor/ceil per cell, preserving integer row and column sums.

    The round-ups are a bipartite b-matching between rows and columns, solved
    as a max-flow; an integral solution always exists for integer margins.
    """
    base = np.floor(targets + 1e-9).astype(np.int64)
    frac = targets - base
    row_need = np.rint(targets.sum(axis=1)).astype(np.int64) - base.sum(axis=1)
    col_need = np.rint(targets.sum(axis=0)).astype(np.int64) - base.sum(axis=0)
    n_rows, n_cols = targets.shape
    source, sink = n_rows + n_cols, n_rows + n_cols + 1
    cap = np.zeros((sink + 1, sink + 1), dtype=np.int32)
    cap[source, :n_rows] = row_need
    for r, c in zip(*np.nonzero(frac > 1e-9)):
        cap[r, n_rows + c] = 1
    cap[n_rows:n_rows + n_cols, sink] = col_need
    flow = maximum_flow(csr_matrix(cap), source, sink)
    if flow.flow_value != row_need.sum():
        raise RuntimeError("controlled rounding failed")
    ups = flow.flow.toarray()[:n_rows, n_rows:n_rows + n_cols].clip(min=0)
    return base + ups


def stratified_split(labels, ratios=(0.6, 0.2, 0.2), seed: int = 0) -> Split:
    """Seeded stratified split of sizes ``floor(r0 n)``, ``floor(r1 n)`` and the remainder.

    Per-class counts are the floor or ceiling of ``class_size * mask_size / n``.
    """
    labels = np.asarray(labels)
    n = len(labels)
    if len(ratios) != 3 or abs(sum(ratios) - 1.0) > 1e-9 or min(ratios) < 0:
        raise ValueError(f"ratios must be three non-negative numbers summing to 1, got {ratios}")
    n_train = int(np.floor(ratios[0] * n))
    n_val = int(np.floor(ratios[1] * n))
    totals = np.array([n_train, n_val, n - n_train - n_val])
    classes = np.unique(labels)
    class_sizes = np.array([(labels == c).sum() for c in classes])
    counts = _controlled_rounding(np.outer(class_sizes, totals) / n)
    rng = np.random.default_rng(seed)
    parts = ([], [], [])
    for cls, row in zip(classes, counts):
        members = rng.permutation(np.flatnonzero(labels == cls))
        cuts = np.cumsum(row)
        parts[0].extend(members[:cuts[0]])
        parts[1].extend(members[cuts[0]:cuts[1]])
        parts[2].extend(members[cuts[1]:])
    return Split.from_indices(n, *parts)


def per_class_split(labels, per_class: int = 20, n_val: int = 500, n_test: int = 1000,
                    seed: int = 0) -> Split:
    """``per_class`` training nodes per class, then random validation and test sets."""
    labels = np.asarray(labels)
    n = len(labels)
    rng = np.random.default_rng(seed)
    train = []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        train.extend(rng.permutation(members)[:per_class].tolist())
    rest = np.setdiff1d(np.arange(n), train)
    rest = rest[rng.permutation(len(rest))]
    if len(rest) < 2:
        raise ValueError("not enough nodes left for validation and test")
    n_val = min(n_val, len(rest) // 2)
    n_test = min(n_test, len(rest) - n_val)
    return Split.from_indices(n, sorted(train), rest[:n_val], rest[n_val:n_val + n_test])
