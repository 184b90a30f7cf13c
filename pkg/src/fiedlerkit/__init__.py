"""Fiedler-value diagnostics for choosing GCN depth."""

__version__ = "0.1.0"

from .graph import (  # noqa: E402
    ComponentDecomposition,
    Graph,
    GraphDomainError,
    bfs_all_pairs,
    build_graph,
    connected_components,
    diameter,
    laplacian,
    mean_distance,
)
from .spectral import (  # noqa: E402
    BoundsReport,
    SolverError,
    SpectralSummary,
    component_fiedler_summary,
    depth_advice,
    fiedler_value,
    laplacian_spectrum,
)

__all__ = [
    "BoundsReport",
    "ComponentDecomposition",
    "Graph",
    "GraphDomainError",
    "SolverError",
    "SpectralSummary",
    "bfs_all_pairs",
    "build_graph",
    "component_fiedler_summary",
    "connected_components",
    "depth_advice",
    "diameter",
    "fiedler_value",
    "laplacian",
    "laplacian_spectrum",
    "mean_distance",
]
