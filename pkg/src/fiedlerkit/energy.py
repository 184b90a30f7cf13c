"""Dirichlet energy, spectral coefficients and the Fiedler-bound smoothness score."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp

from .graph import Graph, GraphDomainError, laplacian

ABS_TOL = 1e-12
REL_TOL = 1e-9


def close(value: float, reference: float, rel: float = REL_TOL) -> bool:
    """Relative comparison against a nonzero reference, absolute 1e-12 otherwise."""
    if reference == 0.0:
        return abs(value) <= ABS_TOL
    return abs(value - reference) <= rel * abs(reference)


def _as_matrix(V) -> np.ndarray:
    V = np.asarray(V, dtype=np.float64)
    if V.ndim == 1:
        V = V[:, None]
    if V.ndim != 2:
        raise ValueError(f"feature matrix must be 2-D, got shape {V.shape}")
    return V


def dirichlet_energy(lap, V) -> float:
    """``Tr(V^T L V)``."""
    V = _as_matrix(V)
    if lap.shape[0] != V.shape[0] or lap.shape[1] != V.shape[0]:
        raise ValueError(f"Laplacian {lap.shape} does not match features {V.shape}")
    return float(np.sum(V * (lap @ V)))


def edge_sum_energy(g: Graph, V) -> float:
    """Sum over edges of squared feature differences."""
    V = _as_matrix(V)
    if V.shape[0] != g.node_count:
        raise ValueError(f"{g.node_count} nodes but {V.shape[0]} feature rows")
    if not g.edge_count:
        return 0.0
    diff = V[g.edges[:, 0]] - V[g.edges[:, 1]]
    return float(np.sum(diff * diff))


def graph_energy(g: Graph, V) -> tuple[float, float]:
    """Both energy forms: (trace form, edge-sum form)."""
    return dirichlet_energy(laplacian(g, sparse=True), V), edge_sum_energy(g, V)


def is_centered(V, tol: float = 1e-9) -> bool:
    V = _as_matrix(V)
    scale = max(np.abs(V).max(initial=0.0), 1.0) * V.shape[0]
    return bool(np.abs(V.sum(axis=0)).max(initial=0.0) <= tol * scale)


def center_features(V) -> np.ndarray:
    V = _as_matrix(V)
    return V - V.mean(axis=0, keepdims=True)


def normalize_total_energy(V) -> np.ndarray:
    """Scale ``V`` uniformly so the squared Frobenius norm equals the row count."""
    V = _as_matrix(V)
    total = float(np.sum(V * V))
    if total == 0.0:
        raise GraphDomainError("cannot normalize an all-zero feature matrix")
    return V * np.sqrt(V.shape[0] / total)


@dataclass
class SpectralCoefficients:
    w: np.ndarray
    basis_residual: float

    def norms_squared(self) -> np.ndarray:
        return np.sum(self.w * self.w, axis=1)

    def reconstruct(self, eigenvectors) -> np.ndarray:
        return np.asarray(eigenvectors) @ self.w


def spectral_coefficients(V, eigenvectors, tol: float = 1e-8) -> SpectralCoefficients:
    """Row ``i`` of the result is ``u_i^T V`` for eigenvector column ``u_i``."""
    V = _as_matrix(V)
    U = np.asarray(eigenvectors, dtype=np.float64)
    if U.shape[0] != V.shape[0]:
        raise ValueError(f"basis has {U.shape[0]} rows, features have {V.shape[0]}")
    gram = U.T @ U
    residual = float(np.abs(gram - np.eye(U.shape[1])).max(initial=0.0))
    if residual > tol:
        raise ValueError(f"eigenvector basis is not orthonormal (Gram residual {residual:.3e})")
    return SpectralCoefficients(U.T @ V, residual)


def energy_spectral_identity(V, eigenvalues, coefficients: SpectralCoefficients) -> float:
    """``sum_{i>=2} lambda_i ||w_i||^2`` for centered ``V``."""
    if not is_centered(V):
        raise GraphDomainError("spectral energy identity needs centered features")
    norms = coefficients.norms_squared()
    lam = np.asarray(eigenvalues, dtype=np.float64)
    return float(np.dot(lam[1:], norms[1:]))


def fiedler_bound(n: int, lam2: float) -> float:
    return n * lam2


def minimal_energy_features(u2, q, n: int | None = None) -> np.ndarray:
    """``u2 (sqrt(n) q)^T``: the centered unit-energy signal with the least Dirichlet energy."""
    u2 = np.asarray(u2, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    n = len(u2) if n is None else n
    if len(u2) != n:
        raise ValueError("u2 length must equal n")
    for name, vec in (("u2", u2), ("q", q)):
        if abs(np.linalg.norm(vec) - 1.0) > 1e-9:
            raise ValueError(f"{name} must have unit norm, got {np.linalg.norm(vec):.12g}")
    return np.outer(u2, np.sqrt(n) * q)


def rho_score(lap, lam2_ref: float, V) -> float:
    """Dirichlet energy of ``V`` relative to the Fiedler bound ``n * lam2_ref``."""
    if lam2_ref <= 0:
        raise GraphDomainError("rho needs a positive reference Fiedler value")
    V = _as_matrix(V)
    return dirichlet_energy(lap, V) / fiedler_bound(V.shape[0], lam2_ref)


@dataclass
class EnergyReport:
    dirichlet_energy: float
    fiedler_bound: float
    rho: float
    total_feature_norm: float
    centered: bool

    def to_dict(self) -> dict:
        return asdict(self)


def energy_report(lap, lam2_ref: float, V, centered_normalized: bool = False) -> EnergyReport:
    """ρ report for ``V`` as given, or after centering and unit-energy normalization."""
    V = _as_matrix(V)
    if centered_normalized:
        V = center_features(V)
        if np.sum(V * V) > 0:
            V = normalize_total_energy(V)
    lap = lap if sp.issparse(lap) else np.asarray(lap)
    e = dirichlet_energy(lap, V)
    return EnergyReport(
        dirichlet_energy=e,
        fiedler_bound=fiedler_bound(V.shape[0], lam2_ref),
        rho=rho_score(lap, lam2_ref, V),
        total_feature_norm=float(np.sum(V * V)),
        centered=is_centered(V),
    )
