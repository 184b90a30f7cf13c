"""Laplacian spectra, per-component Fiedler values and the distance bounds built on them."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graph import Graph, GraphDomainError, bfs_distances, connected_components, laplacian

DENSE_CUTOFF = 2048
ZERO_TOL_FACTOR = 1e-8

# advisory thresholds read off the real-data experiments
OVERSMOOTHING_SIMPLE_AVG = 1.4
SWEET_SPOT = (0.5, 1.2)


class SolverError(RuntimeError):
    """Iterative eigensolver failed to converge."""

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


def zero_tolerance(n: int, max_degree: int) -> float:
    return ZERO_TOL_FACTOR * n * max(max_degree, 1)


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def laplacian_spectrum(g: Graph, want_vectors: bool = False):
    """Ascending Laplacian eigenvalues, plus orthonormal eigenvectors as columns if asked."""
    lap = laplacian(g)
    if not want_vectors:
        return np.linalg.eigvalsh(lap)
    vals, vecs = np.linalg.eigh(lap)
    return vals, fix_signs(vecs)


def dense_fiedler(lap: np.ndarray) -> float:
    if lap.shape[0] < 2:
        return 0.0
    return float(np.linalg.eigvalsh(lap)[1])


def iterative_fiedler(lap, seed: int = 0, tol: float = 1e-12, maxiter: int | None = None):
    """Smallest nonzero eigenpair of a connected Laplacian by shift-invert Lanczos.

    The constant vector is projected out of every iterate, so the dominant
    eigenvalue of ``P (L + sI)^-1 P`` is ``1 / (lambda_2 + s)``. The returned
    value is the Rayleigh quotient of the converged vector against ``L``.
    """
    lap = sp.csc_matrix(lap, dtype=np.float64)
    n = lap.shape[0]
    if n < 3:
        return dense_fiedler(lap.toarray()), None
    shift = 1e-6 * max(float(lap.diagonal().max()), 1.0)
    lu = spla.splu(lap + shift * sp.identity(n, format="csc"))

    def deflate(x):
        return x - x.mean()

    op = spla.LinearOperator((n, n), matvec=lambda x: deflate(lu.solve(deflate(np.ravel(x)))),
                             dtype=np.float64)
    v0 = deflate(np.random.default_rng(seed).standard_normal(n))
    maxiter = maxiter or 20 * n
    try:
        _, vecs = spla.eigsh(op, k=1, which="LA", v0=v0, tol=tol, maxiter=maxiter)
    except spla.ArpackNoConvergence as exc:
        raise SolverError(
            f"Lanczos did not converge within {maxiter} iterations", iterations=maxiter
        ) from exc
    u = deflate(vecs[:, 0])
    u /= np.linalg.norm(u)
    lam = float(u @ (lap @ u))
    return lam, fix_signs(u[:, None])[:, 0]


def fiedler_value(g: Graph, method: str = "auto") -> float:
    """Algebraic connectivity of a connected graph with at least two nodes."""
    if g.node_count < 2:
        raise GraphDomainError("Fiedler value needs at least two nodes")
    comps = connected_components(g)
    if comps.component_count > 1:
        raise GraphDomainError(
            f"graph has {comps.component_count} components (lambda_2 = 0); "
            "use component_fiedler_summary for per-component values"
        )
    return _component_fiedler(g, method=method, seed=0)


def _component_fiedler(g: Graph, method: str = "auto", seed: int = 0) -> float:
    n = g.node_count
    if n < 2:
        return 0.0
    if method == "auto":
        method = "dense" if n <= DENSE_CUTOFF else "iterative"
    if method == "dense":
        return dense_fiedler(laplacian(g))
    if method == "iterative":
        return iterative_fiedler(laplacian(g, sparse=True), seed=seed)[0]
    raise ValueError(f"unknown method {method!r}")


@dataclass
class SpectralSummary:
    per_component_fiedler: list[tuple[int, float]]
    simple_average_fiedler: float
    weighted_average_fiedler: float
    max_degree: int
    node_count: int
    zero_eigenvalue_count: int

    @property
    def component_count(self) -> int:
        return len(self.per_component_fiedler)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_component_fiedler"] = [[int(s), float(v)] for s, v in self.per_component_fiedler]
        return d


def aggregate_fiedler(pairs) -> tuple[float, float]:
    """(simple mean, size-weighted mean) of per-component ``(size, lambda_2)`` pairs."""
    sizes = np.array([s for s, _ in pairs], dtype=np.float64)
    vals = np.array([v for _, v in pairs], dtype=np.float64)
    return float(vals.mean()), float((sizes * vals).sum() / sizes.sum())


def component_fiedler_summary(g: Graph, method: str = "auto") -> SpectralSummary:
    """Fiedler value of every connected component plus both aggregates.

    Singleton components contribute 0. The zero-eigenvalue count is taken
    from each component's own spectrum (dense path) or from the deflated
    solve (iterative path: the constant mode, plus one more if lambda_2 is
    itself below the zero tolerance).
    """
    comps = connected_components(g)
    delta = g.max_degree
    tol = zero_tolerance(g.node_count, delta)
    pairs = []
    zeros = 0
    for cid in range(comps.component_count):
        members = comps.members(cid)
        sub = g.subgraph(members)
        n = sub.node_count
        m = method if method != "auto" else ("dense" if n <= DENSE_CUTOFF else "iterative")
        if n == 1:
            lam = 0.0
            zeros += 1
        elif m == "dense":
            vals = np.linalg.eigvalsh(laplacian(sub))
            lam = float(vals[1])
            zeros += int((np.abs(vals) < tol).sum())
        else:
            lap = laplacian(sub, sparse=True)
            if np.abs(lap @ np.ones(n)).max() < tol:
                zeros += 1
            lam = iterative_fiedler(lap, seed=cid)[0]
            zeros += int(abs(lam) < tol)
        pairs.append((n, max(lam, 0.0)))
    simple, weighted = aggregate_fiedler(pairs)
    return SpectralSummary(
        per_component_fiedler=pairs,
        simple_average_fiedler=simple,
        weighted_average_fiedler=weighted,
        max_degree=delta,
        node_count=g.node_count,
        zero_eigenvalue_count=zeros,
    )


# --- distance bounds -------------------------------------------------------


def _check_bound_args(n, lam2):
    if lam2 <= 0:
        raise GraphDomainError("bounds need lambda_2 > 0 (connected graph)")
    if n < 2:
        raise GraphDomainError("bounds need n >= 2")


def mean_distance_bounds(n: int, lam2: float, max_degree: int) -> tuple[float, float]:
    _check_bound_args(n, lam2)
    lower = (2.0 / lam2 + (n - 2) / 2.0) / (n - 1)
    upper = n / (n - 1) * (math.ceil((max_degree + lam2) / (4.0 * lam2) * math.log(n - 1)) + 0.5)
    return lower, upper


def diameter_bounds(n: int, lam2: float, max_degree: int) -> tuple[float, float]:
    _check_bound_args(n, lam2)
    lower = 4.0 / (n * lam2)
    upper = 2.0 * math.ceil(math.sqrt(2.0 * max_degree / lam2) * math.log2(n))
    return lower, float(upper)


@dataclass
class BoundsReport:
    mean_distance_lower: float
    mean_distance_upper: float
    diameter_lower: float
    diameter_upper: float
    # the (n, lambda_2, Delta) the bounds were evaluated at
    n: int = 0
    fiedler: float = 0.0
    max_degree: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def bounds_report(n: int, lam2: float, max_degree: int) -> BoundsReport:
    md = mean_distance_bounds(n, lam2, max_degree)
    dm = diameter_bounds(n, lam2, max_degree)
    return BoundsReport(md[0], md[1], dm[0], dm[1], n=n, fiedler=lam2, max_degree=max_degree)


def largest_component_bounds(g: Graph, summary: SpectralSummary | None = None):
    """Bounds for the largest component, or None if it has fewer than two nodes."""
    comps = connected_components(g)
    cid = int(np.argmax(comps.component_sizes))
    sub = g.subgraph(comps.members(cid))
    if sub.node_count < 2:
        return None
    if summary is not None:
        lam = summary.per_component_fiedler[cid][1]
    else:
        lam = _component_fiedler(sub, seed=cid)
    return bounds_report(sub.node_count, lam, sub.max_degree)


def growth_curve(g: Graph, source: int) -> list[int]:
    """``r_k`` = number of nodes within ``k`` hops of ``source``, for k = 0..eccentricity."""
    dist = bfs_distances(g, source)
    if (dist < 0).any():
        raise GraphDomainError("growth curve needs a connected graph")
    counts = np.bincount(dist)
    return np.cumsum(counts).tolist()


# --- depth advice ----------------------------------------------------------


@dataclass
class DepthAdvice:
    verdict: str
    risk: str | None
    warnings: list[str] = field(default_factory=list)
    depth_flags: list[dict] = field(default_factory=list)
    rationale: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def depth_advice(summary: SpectralSummary, bounds: BoundsReport | None,
                 candidate_depths=()) -> DepthAdvice:
    weighted = summary.weighted_average_fiedler
    simple = summary.simple_average_fiedler
    lo, hi = SWEET_SPOT
    if weighted > hi:
        verdict, risk = "over-connected", "over-smoothing"
    elif weighted < lo:
        verdict, risk = "under-connected", "under-reaching"
    else:
        verdict, risk = "sweet-spot", None
    rationale = [
        f"weighted average Fiedler value {weighted:.5g} vs sweet-spot band [{lo}, {hi}]",
        f"simple average Fiedler value {simple:.5g} vs over-smoothing threshold "
        f"{OVERSMOOTHING_SIMPLE_AVG} (threshold applied to the simple average)",
    ]
    warnings = []
    if simple > OVERSMOOTHING_SIMPLE_AVG:
        warnings.append(
            f"over-connected: simple average Fiedler value {simple:.5g} exceeds "
            f"{OVERSMOOTHING_SIMPLE_AVG}; expect over-smoothing as depth grows"
        )
    flags = []
    for depth in candidate_depths:
        entry = {"depth": int(depth), "under_reaching": False}
        if bounds is not None:
            entry["under_reaching"] = bool(depth < bounds.diameter_lower)
            entry["diameter_lower"] = bounds.diameter_lower
            entry["diameter_upper"] = bounds.diameter_upper
        flags.append(entry)
    if bounds is not None:
        short = [f["depth"] for f in flags if f["under_reaching"]]
        rationale.append(
            f"diameter bounds [{bounds.diameter_lower:.4g}, {bounds.diameter_upper:.4g}] "
            f"on the largest component (n={bounds.n})"
        )
        if short:
            warnings.append(f"under-reaching: depths {short} are below the diameter lower bound")
    return DepthAdvice(verdict, risk, warnings, flags, rationale)
