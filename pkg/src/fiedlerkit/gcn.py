"""A small two-to-N layer GCN in numpy with hand-written gradients.

Layer rule: ``H_{l+1} = relu(A_hat H_l W_l)`` with ``A_hat = D~^-1/2 (A + I) D~^-1/2``;
the last layer emits raw class scores. Training follows the usual
semi-supervised recipe: Glorot init, Adam, dropout on layer inputs, L2 on the
first layer's weights, early stopping on validation accuracy.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np
import scipy.sparse as sp

from .energy import rho_score
from .graph import Graph, laplacian
from .spectral import component_fiedler_summary
from .splits import Split


FEATURE_NORMS = ("auto", "row", "standardize", "none")


def normalize_features(X, how: str = "auto") -> np.ndarray:
    """Row-normalize (rows sum to 1) or column-standardize the input features."""
    X = np.asarray(X, dtype=np.float64)
    if how == "auto":
        how = "row" if X.min(initial=0.0) >= 0 else "standardize"
    if how == "row":
        sums = X.sum(axis=1, keepdims=True)
        sums[sums == 0] = 1.0
        return X / sums
    if how == "standardize":
        std = X.std(axis=0, keepdims=True)
        std[std == 0] = 1.0
        return (X - X.mean(axis=0, keepdims=True)) / std
    if how == "none":
        return X
    raise ValueError(f"unknown feature normalization {how!r}")


@dataclass(frozen=True)
class TrainConfig:
    depth: int = 2
    hidden_dim: int = 16
    learning_rate: float = 0.01
    weight_decay: float = 5e-4
    dropout_rate: float = 0.5
    max_epochs: int = 200
    patience: int = 10
    seed: int = 0
    # "row" | "standardize" | "none" | "auto" (row if all features >= 0, else standardize)
    feature_norm: str = "auto"

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.hidden_dim < 1:
            raise ValueError("hidden_dim must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.max_epochs < 1 or self.patience < 1:
            raise ValueError("max_epochs and patience must be >= 1")
        if self.feature_norm not in FEATURE_NORMS:
            raise ValueError(f"feature_norm must be one of {FEATURE_NORMS}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, values: dict) -> TrainConfig:
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in types:
                raise ValueError(f"unknown config key {key!r}")
            if types[key] in ("str", str):
                kwargs[key] = str(raw)
            else:
                kwargs[key] = int(raw) if types[key] in ("int", int) else float(raw)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> TrainConfig:
        """Parse flat ``key = value`` lines; ``#`` starts a comment."""
        values = {}
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key=value")
                key, value = (part.strip() for part in line.split("=", 1))
                values[key] = value
        return cls.from_mapping(values)


def normalized_adjacency(g: Graph, sparse: bool = False):
    """``D~^-1/2 (A + I) D~^-1/2``."""
    a_tilde = g.adjacency() + sp.identity(g.node_count, format="csr")
    d_inv_sqrt = 1.0 / np.sqrt(np.asarray(a_tilde.sum(axis=1)).ravel())
    scale = sp.diags(d_inv_sqrt)
    a_hat = sp.csr_matrix(scale @ a_tilde @ scale)
    a_hat.sort_indices()
    return a_hat if sparse else a_hat.toarray()


@dataclass
class GcnModel:
    layer_weights: list[np.ndarray]
    normalized_adjacency: sp.csr_matrix

    def __post_init__(self):
        if not sp.issparse(self.normalized_adjacency):
            self.normalized_adjacency = sp.csr_matrix(self.normalized_adjacency)
        for a, b in zip(self.layer_weights, self.layer_weights[1:]):
            if a.shape[1] != b.shape[0]:
                raise ValueError(f"weight shapes {a.shape} and {b.shape} do not compose")

    @property
    def depth(self) -> int:
        return len(self.layer_weights)

    @classmethod
    def initialize(cls, g: Graph, input_dim: int, n_classes: int, depth: int,
                   hidden_dim: int, rng: np.random.Generator) -> GcnModel:
        dims = [input_dim] + [hidden_dim] * (depth - 1) + [n_classes]
        weights = []
        for fan_in, fan_out in zip(dims, dims[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        return cls(weights, normalized_adjacency(g, sparse=True))

    def copy(self) -> GcnModel:
        return GcnModel([w.copy() for w in self.layer_weights], self.normalized_adjacency)


def _dropout_mask(shape, rate, rng):
    return (rng.random(shape) >= rate) / (1.0 - rate)


def _forward(model: GcnModel, X, rate: float = 0.0, rng=None):
    """Forward pass keeping what backprop needs: (logits, inputs, masks, pre-activations)."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != model.layer_weights[0].shape[0]:
        raise ValueError(
            f"feature width {X.shape[1]} != first layer input {model.layer_weights[0].shape[0]}"
        )
    if X.shape[0] != model.normalized_adjacency.shape[0]:
        raise ValueError("feature rows do not match the graph")
    a_hat = model.normalized_adjacency
    h = X
    inputs, masks, pre = [], [], []
    for W in model.layer_weights:
        mask = None
        if rate > 0.0:
            mask = _dropout_mask(h.shape, rate, rng)
            h = h * mask
        inputs.append(h)
        masks.append(mask)
        z = a_hat @ (h @ W)
        pre.append(z)
        h = np.maximum(z, 0.0)
    return pre[-1], inputs, masks, pre


def forward(model: GcnModel, X, dropout_active: bool = False, seed=None, rate: float = 0.5):
    """Return ``(logits, hidden_states)``; ``hidden_states[k]`` is the output of layer ``k+1``.

    The last hidden state is the logits themselves. Dropout (at ``rate``) is
    applied to every layer input only when ``dropout_active``; ``seed`` may be
    an int or a ``numpy.random.Generator``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    logits, _, _, pre = _forward(model, X, rate if dropout_active else 0.0, rng)
    hidden = [np.maximum(z, 0.0) for z in pre[:-1]] + [logits]
    return logits, hidden


def _log_softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def cross_entropy(logits, labels, mask) -> float:
    logp = _log_softmax(logits[mask])
    return float(-logp[np.arange(len(logp)), labels[mask]].mean())


def loss_and_grads(model: GcnModel, X, labels, mask, weight_decay: float = 0.0,
                   rate: float = 0.0, rng=None):
    """Masked mean cross-entropy plus ``weight_decay/2 * ||W_1||^2`` and its weight gradients.

    The rectifier uses subgradient 0 at exactly 0.
    """
    labels = np.asarray(labels)
    mask = np.asarray(mask, dtype=bool)
    logits, inputs, masks, pre = _forward(model, X, rate, rng)
    W = model.layer_weights
    loss = cross_entropy(logits, labels, mask) + 0.5 * weight_decay * float(np.sum(W[0] * W[0]))

    idx = np.flatnonzero(mask)
    probs = np.exp(_log_softmax(logits[idx]))
    probs[np.arange(len(idx)), labels[idx]] -= 1.0
    dz = np.zeros_like(logits)
    dz[idx] = probs / len(idx)

    a_hat = model.normalized_adjacency
    grads = [None] * len(W)
    for layer in range(len(W) - 1, -1, -1):
        # A_hat is symmetric, so A_hat^T dz == A_hat dz
        back = a_hat @ dz
        grads[layer] = inputs[layer].T @ back
        if layer == 0:
            break
        dh = back @ W[layer].T
        if masks[layer] is not None:
            dh = dh * masks[layer]
        dz = dh * (pre[layer - 1] > 0.0)
    grads[0] = grads[0] + weight_decay * W[0]
    return loss, grads


class Adam:
    def __init__(self, params, lr=0.01, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def accuracy(logits, labels, mask) -> float:
    mask = np.asarray(mask, dtype=bool)
    return float((logits[mask].argmax(axis=1) == np.asarray(labels)[mask]).mean())


@dataclass
class TrainReport:
    per_epoch: list[tuple[float, float]]
    test_accuracy: float
    rho_trace: list[float]
    depth: int
    seed: int
    best_epoch: int = 0
    energy_trace: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_epoch"] = [[float(a), float(b)] for a, b in self.per_epoch]
        return d


def reference_fiedler(g: Graph) -> float:
    """Whole-graph lambda_2 when connected, otherwise the size-weighted component average."""
    summary = component_fiedler_summary(g)
    if summary.component_count == 1:
        return summary.per_component_fiedler[0][1]
    return summary.weighted_average_fiedler


def rho_trace(model: GcnModel, g: Graph, X, lam2_ref: float):
    """Per-layer (energy, rho) of the dropout-free hidden states after centering."""
    lap = laplacian(g, sparse=True)
    _, hidden = forward(model, X)
    energies, rhos = [], []
    for h in hidden:
        h = h - h.mean(axis=0, keepdims=True)
        e = float(np.sum(h * (lap @ h)))
        energies.append(e)
        rhos.append(rho_score(lap, lam2_ref, h) if lam2_ref > 0 else float("nan"))
    return energies, rhos


def train(g: Graph, config: TrainConfig, split: Split, lam2_ref: float | None = None,
          return_model: bool = False):
    """Train one GCN and report test accuracy at the best-validation epoch.

    An epoch improves on the best so far if its validation accuracy is higher,
    or equal with lower validation loss. The rho trace is measured on the
    best-validation weights, the model whose test accuracy is reported.
    """
    if g.labels is None:
        raise ValueError("training needs node labels")
    if g.features is None:
        raise ValueError("training needs node features")
    if split.node_count != g.node_count:
        raise ValueError("split masks do not match the graph")
    labels = g.labels
    X = normalize_features(g.features, config.feature_norm)
    n_classes = int(labels.max()) + 1
    rng = np.random.default_rng(config.seed)
    model = GcnModel.initialize(g, X.shape[1], n_classes, config.depth, config.hidden_dim, rng)
    opt = Adam(model.layer_weights, lr=config.learning_rate)

    history = []
    best = (-1.0, np.inf)
    best_weights, best_epoch, best_test = None, 0, 0.0
    best_loss = np.inf
    stale = 0
    for epoch in range(config.max_epochs):
        loss, grads = loss_and_grads(model, X, labels, split.train, config.weight_decay,
                                     config.dropout_rate, rng)
        opt.step(model.layer_weights, grads)
        logits, _ = forward(model, X)
        val_acc = accuracy(logits, labels, split.val)
        val_loss = cross_entropy(logits, labels, split.val)
        history.append((loss, val_acc))
        improved = False
        if val_acc > best[0] or (val_acc == best[0] and val_loss < best[1]):
            best = (val_acc, min(val_loss, best[1]))
            best_weights = [w.copy() for w in model.layer_weights]
            best_epoch, best_test = epoch, accuracy(logits, labels, split.test)
            improved = True
        if val_loss < best_loss:
            best_loss = val_loss
            improved = True
        stale = 0 if improved else stale + 1
        if stale >= config.patience:
            break

    final = GcnModel(best_weights, model.normalized_adjacency)
    if lam2_ref is None:
        lam2_ref = reference_fiedler(g)
    energies, rhos = rho_trace(final, g, X, lam2_ref)
    report = TrainReport(history, best_test, rhos, config.depth, config.seed, best_epoch, energies)
    return (report, final) if return_model else report


def gradient_check(model: GcnModel, X, labels, mask, weight_decay: float = 0.0,
                   step: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference weight gradients.

    Relative error per entry is ``|a - f| / max(|a|, |f|, 1e-8)``. Dropout is off.
    """
    _, grads = loss_and_grads(model, X, labels, mask, weight_decay)
    worst = 0.0
    for W, G in zip(model.layer_weights, grads):
        for idx in np.ndindex(W.shape):
            orig = W[idx]
            W[idx] = orig + step
            up, _ = loss_and_grads(model, X, labels, mask, weight_decay)
            W[idx] = orig - step
            down, _ = loss_and_grads(model, X, labels, mask, weight_decay)
            W[idx] = orig
            fd = (up - down) / (2 * step)
            denom = max(abs(G[idx]), abs(fd), 1e-8)
            worst = max(worst, abs(G[idx] - fd) / denom)
    return worst


# --- depth sweeps ----------------------------------------------------------


@dataclass
class SweepResult:
    rows: list[dict]
    summary: list[dict]
    lam2_ref: float

    def to_csv(self) -> str:
        max_depth = max(r["depth"] for r in self.rows)
        cols = ["depth", "repeat", "seed", "test_accuracy", "best_epoch"]
        cols += [f"rho_{k}" for k in range(1, max_depth + 1)]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for r in self.rows:
            rhos = [repr(float(x)) for x in r["rho_trace"]]
            rhos += [""] * (max_depth - len(rhos))
            writer.writerow([r["depth"], r["repeat"], r["seed"], repr(float(r["test_accuracy"])),
                             r["best_epoch"], *rhos])
        return buf.getvalue()

    def summary_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["depth", "mean_accuracy", "std_accuracy", "repeats"])
        for s in self.summary:
            writer.writerow([s["depth"], repr(s["mean_accuracy"]), repr(s["std_accuracy"]),
                             s["repeats"]])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"lambda2_ref": self.lam2_ref, "summary": self.summary, "runs": self.rows}


def _sweep_job(args):
    g, config, split, lam2_ref, repeat = args
    report = train(g, config, split, lam2_ref)
    return {
        "depth": config.depth,
        "repeat": repeat,
        "seed": config.seed,
        "test_accuracy": report.test_accuracy,
        "best_epoch": report.best_epoch,
        "rho_trace": report.rho_trace,
        "energy_trace": report.energy_trace,
    }


def sweep_workers() -> int:
    try:
        return max(1, int(os.environ.get("FA_THREADS", "1")))
    except ValueError:
        return 1


def depth_sweep(g: Graph, depths, config_base: TrainConfig, repeats: int, split: Split,
                lam2_ref: float | None = None, workers: int | None = None) -> SweepResult:
    """Train ``repeats`` models per depth with seeds ``seed + repeat``; aggregate accuracy."""
    depths = list(depths)
    if not depths:
        raise ValueError("depths must be non-empty")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if lam2_ref is None:
        lam2_ref = reference_fiedler(g)
    jobs = [
        (g, replace(config_base, depth=d, seed=config_base.seed + r), split, lam2_ref, r)
        for d in depths
        for r in range(repeats)
    ]
    workers = workers or sweep_workers()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_job, jobs))
    else:
        rows = [_sweep_job(job) for job in jobs]
    summary = []
    for d in depths:
        accs = np.array([r["test_accuracy"] for r in rows if r["depth"] == d])
        summary.append({
            "depth": d,
            "mean_accuracy": float(accs.mean()),
            "std_accuracy": float(accs.std(ddof=1)) if len(accs) > 1 else 0.0,
            "repeats": len(accs),
        })
    return SweepResult(rows, summary, float(lam2_ref))
