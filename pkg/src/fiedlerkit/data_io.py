"""Dataset loaders (citation networks, PolBlogs, generic CSV) and on-disk formats.

Generic formats, all 0-based:

* edges: ``graph.write_edge_list`` text (``n <count>`` header then ``i j`` lines)
* features: headerless CSV of reals, one row per node
* labels: CSV rows ``node_index,class``
* masks: CSV rows ``node_index,{train|val|test}``
"""

from __future__ import annotations

import csv
import pickle
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import Graph, build_graph, read_edge_list, write_edge_list
from .splits import SPLIT_NAMES, Split, per_class_split, stratified_split


class DataFormatError(ValueError):
    pass


@dataclass
class Dataset:
    graph: Graph
    split: Split | None
    name: str
    provenance_notes: list[str] = field(default_factory=list)


# --- generic CSV formats ---------------------------------------------------


def write_features_csv(features, path) -> None:
    np.savetxt(path, np.asarray(features, dtype=np.float64), delimiter=",", fmt="%.17g")


def read_features_csv(path) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None


def write_labels_csv(labels, path) -> None:
    lines = [f"{i},{int(c)}" for i, c in enumerate(np.asarray(labels))]
    Path(path).write_text("\n".join(lines) + "\n")


def _read_index_csv(path, parse):
    out = {}
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].startswith("#"):
                continue
            if len(row) != 2:
                raise DataFormatError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                idx = int(row[0])
                value = parse(row[1].strip())
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from None
            if idx in out:
                raise DataFormatError(f"{path}:{lineno}: node {idx} listed twice")
            out[idx] = value
    return out


def read_labels_csv(path, node_count: int) -> np.ndarray:
    entries = _read_index_csv(path, int)
    if sorted(entries) != list(range(node_count)):
        raise DataFormatError(
            f"{path}: labels must cover nodes 0..{node_count - 1} exactly once "
            f"(got {len(entries)} entries)"
        )
    return np.array([entries[i] for i in range(node_count)], dtype=np.int64)


def write_masks_csv(split: Split, path) -> None:
    lines = []
    for i in range(split.node_count):
        for name in SPLIT_NAMES:
            if getattr(split, name)[i]:
                lines.append(f"{i},{name}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_masks_csv(path, node_count: int) -> Split:
    def parse(v):
        if v not in SPLIT_NAMES:
            raise ValueError(f"unknown split name {v!r}")
        return v

    entries = _read_index_csv(path, parse)
    if any(not 0 <= i < node_count for i in entries):
        raise DataFormatError(f"{path}: node index out of range")
    groups = {name: [i for i, v in entries.items() if v == name] for name in SPLIT_NAMES}
    return Split.from_indices(node_count, groups["train"], groups["val"], groups["test"])


def export_dataset(graph: Graph, out_dir, split: Split | None = None) -> dict:
    """Write edges/features/labels (and masks) into ``out_dir``; returns the paths."""
    if split is not None and split.node_count != graph.node_count:
        raise ValueError(f"split covers {split.node_count} nodes, graph has {graph.node_count}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"edges": out / "edges.txt"}
    write_edge_list(graph, paths["edges"])
    if graph.features is not None:
        paths["features"] = out / "features.csv"
        write_features_csv(graph.features, paths["features"])
    if graph.labels is not None:
        paths["labels"] = out / "labels.csv"
        write_labels_csv(graph.labels, paths["labels"])
    if split is not None:
        paths["masks"] = out / "masks.csv"
        write_masks_csv(split, paths["masks"])
    return paths


def load_generic(edge_path, features_csv=None, labels_csv=None, split_spec=None,
                 name: str = "generic") -> Dataset:
    """Assemble a dataset from the generic formats.

    ``split_spec`` is either a masks-CSV path, a ``(ratios, seed)`` pair for a
    stratified split, or None.
    """
    g = read_edge_list(edge_path)
    notes = [f"edges from {edge_path}: {g.node_count} nodes, {g.edge_count} undirected edges"]
    features = labels = None
    if features_csv is not None:
        features = read_features_csv(features_csv)
        if features.shape[0] != g.node_count:
            raise DataFormatError(
                f"{features_csv}: {features.shape[0]} feature rows for {g.node_count} nodes"
            )
    if labels_csv is not None:
        labels = read_labels_csv(labels_csv, g.node_count)
    g = Graph(g.node_count, g.edges, features, labels)
    split = None
    if split_spec is not None:
        if isinstance(split_spec, (str, Path)):
            split = read_masks_csv(split_spec, g.node_count)
            notes.append(f"split read from {split_spec}")
        else:
            if labels is None:
                raise DataFormatError("a stratified split needs a labels file")
            ratios, seed = split_spec
            split = stratified_split(labels, ratios, seed)
            notes.append(f"stratified split ratios={tuple(ratios)} seed={seed}")
    return Dataset(g, split, name, notes)


# --- citation networks -----------------------------------------------------


def load_citation(content_path, cites_path, split_seed: int = 0, name: str | None = None) -> Dataset:
    """Load ``.content``/``.cites`` files (LINQS layout).

    Content lines: ``paper_id f_1 ... f_m label``; cites lines:
    ``cited_id citing_id``. The LINQS release carries no planted split, so a
    seeded 20-per-class / 500 / 1000 split is drawn.
    """
    ids, rows, raw_labels = {}, [], []
    width = None
    with open(content_path) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 3:
                raise DataFormatError(f"{content_path}:{lineno}: too few columns")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise DataFormatError(
                    f"{content_path}:{lineno}: expected {width} columns, got {len(parts)}"
                )
            if parts[0] in ids:
                raise DataFormatError(f"{content_path}:{lineno}: duplicate id {parts[0]!r}")
            try:
                rows.append([float(x) for x in parts[1:-1]])
            except ValueError as exc:
                raise DataFormatError(f"{content_path}:{lineno}: {exc}") from None
            ids[parts[0]] = len(ids)
            raw_labels.append(parts[-1])
    classes = sorted(set(raw_labels))
    labels = np.array([classes.index(c) for c in raw_labels], dtype=np.int64)

    pairs, dangling, self_loops = [], 0, 0
    with open(cites_path) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise DataFormatError(f"{cites_path}:{lineno}: expected 2 columns")
            a, b = parts
            if a not in ids or b not in ids:
                dangling += 1
                continue
            if a == b:
                self_loops += 1
                continue
            pairs.append((ids[a], ids[b]))
    g = build_graph(pairs, len(ids), features=np.array(rows), labels=labels)
    split = per_class_split(labels, 20, 500, 1000, seed=split_seed)
    notes = [
        f"{len(ids)} papers, {len(rows[0]) if rows else 0} features, {len(classes)} classes",
        f"dropped {dangling} citations referencing unknown ids",
        f"dropped {self_loops} self-citations",
        f"{len(pairs)} citation lines folded to {g.edge_count} undirected edges "
        f"({2 * g.edge_count} directed entries)",
        f"split: 20 per class / 500 / 1000, seed {split_seed}",
    ]
    name = name or Path(content_path).stem
    return Dataset(g, split, name, notes)


def _unpickle(path):
    # written by Python 2; latin1 keeps numpy buffers intact
    with open(path, "rb") as fh:
        return pickle.load(fh, encoding="latin1")


def _dense(m):
    return m.toarray() if hasattr(m, "toarray") else np.asarray(m)


def load_planetoid(prefix, name: str | None = None) -> Dataset:
    """Load the Planetoid pickles ``<prefix>.{x,y,tx,ty,allx,ally,graph,test.index}``.

    Uses the standard planted split: the first ``len(y)`` nodes train, the next
    500 validate, ``test.index`` tests. Test ids missing from the index range
    (CiteSeer) become zero-feature nodes.
    """
    prefix = str(prefix)
    parts = {}
    for key in ("x", "y", "tx", "ty", "allx", "ally", "graph"):
        parts[key] = _unpickle(f"{prefix}.{key}")
    test_index = [int(line) for line in Path(f"{prefix}.test.index").read_text().split()]
    test_sorted = np.sort(test_index)
    allx, ally = _dense(parts["allx"]), _dense(parts["ally"])
    tx, ty = _dense(parts["tx"]), _dense(parts["ty"])
    notes = []
    span = test_sorted[-1] - test_sorted[0] + 1
    if span != len(test_sorted):
        full_tx = np.zeros((span, tx.shape[1]))
        full_tx[test_sorted - test_sorted[0]] = tx
        full_ty = np.zeros((span, ty.shape[1]))
        full_ty[test_sorted - test_sorted[0]] = ty
        notes.append(f"padded {span - len(test_sorted)} isolated test-range nodes with zero features")
        tx, ty = full_tx, full_ty
    features = np.vstack([allx, tx])
    onehot = np.vstack([ally, ty])
    features[test_index] = features[test_sorted]
    onehot[test_index] = onehot[test_sorted]
    labels = onehot.argmax(axis=1).astype(np.int64)
    n = features.shape[0]

    pairs = [(int(src), int(dst)) for src, nbrs in parts["graph"].items() for dst in nbrs]
    pairs = [(a, b) for a, b in pairs if a < n and b < n]
    g = build_graph(pairs, n, features=features, labels=labels)
    n_train = _dense(parts["y"]).shape[0]
    val_end = min(n_train + 500, allx.shape[0])
    split = Split.from_indices(n, range(n_train), range(n_train, val_end), test_index)
    notes += [
        f"{n} nodes, {features.shape[1]} features, {onehot.shape[1]} classes",
        f"{g.edge_count} undirected edges ({2 * g.edge_count} directed entries)",
        f"planted split: {n_train} train / {val_end - n_train} val / {len(test_index)} test",
    ]
    return Dataset(g, split, name or Path(prefix).name.replace("ind.", ""), notes)


# --- PolBlogs --------------------------------------------------------------


def _data_lines(path):
    """Yield (lineno, fields) for non-comment lines; skips a MatrixMarket size line."""
    matrix_market = False
    size_seen = False
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if stripped.startswith("%%MatrixMarket"):
                matrix_market = True
                continue
            if not stripped or stripped[0] in "%#":
                continue
            fields_ = stripped.replace(",", " ").split()
            if matrix_market and not size_seen:
                size_seen = True
                continue
            yield lineno, fields_


def _sort_ids(ids):
    try:
        return sorted(ids, key=int)
    except ValueError:
        return sorted(ids)


def preprocess_polblogs(edge_path, community_path, split_seed: int = 0,
                        ratios=(0.6, 0.2, 0.2)) -> Dataset:
    """Drop nodes in single-member communities; identity features; communities as labels.

    Edge lines are ``u v [weight]`` and community lines ``node community``;
    ``%``/``#`` lines are comments and a MatrixMarket size line is skipped.
    Direction and weights are discarded.
    """
    community = {}
    for lineno, fields_ in _data_lines(community_path):
        if len(fields_) < 2:
            raise DataFormatError(f"{community_path}:{lineno}: expected 'node community'")
        if fields_[0] in community:
            raise DataFormatError(f"{community_path}:{lineno}: node {fields_[0]} listed twice")
        community[fields_[0]] = fields_[1]
    raw_edges = []
    for lineno, fields_ in _data_lines(edge_path):
        if len(fields_) < 2:
            raise DataFormatError(f"{edge_path}:{lineno}: expected 'u v'")
        raw_edges.append((fields_[0], fields_[1]))

    counts = {}
    for c in community.values():
        counts[c] = counts.get(c, 0) + 1
    singletons = {c for c, k in counts.items() if k == 1}
    kept_ids = _sort_ids([v for v, c in community.items() if c not in singletons])
    index = {v: i for i, v in enumerate(kept_ids)}
    classes = _sort_ids(sorted({community[v] for v in kept_ids}))
    class_index = {c: i for i, c in enumerate(classes)}
    labels = np.array([class_index[community[v]] for v in kept_ids], dtype=np.int64)

    unlabeled = {x for e in raw_edges for x in e if x not in community}
    pairs = [(index[a], index[b]) for a, b in raw_edges if a in index and b in index]
    n = len(kept_ids)
    if n == 0:
        raise DataFormatError("no nodes left after removing single-member communities")
    g = build_graph(pairs, n, features=np.eye(n), labels=labels)
    notes = [
        f"{len(community)} labelled nodes, {len(counts)} communities in {community_path}",
        f"removed {len(community) - n} nodes in {len(singletons)} single-member communities",
        f"{len(unlabeled)} edge endpoints absent from the community file were dropped",
        f"{len(raw_edges)} edge lines folded to {g.edge_count} undirected edges",
        f"{n} nodes and {len(classes)} classes remain; features = {n}x{n} identity",
    ]
    split = None
    try:
        split = stratified_split(labels, ratios, split_seed)
        notes.append(f"stratified split ratios={tuple(ratios)} seed={split_seed}")
    except ValueError as exc:
        notes.append(f"no split: {exc}")
    return Dataset(g, split, "polblogs", notes)
