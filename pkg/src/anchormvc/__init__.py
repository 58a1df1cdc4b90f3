"""Anchor-bipartite-graph multi-view clustering with tensor Schatten-p fusion.

Builds per-view sample-to-anchor graphs, fuses them with an augmented
Lagrangian solver whose regularizer couples the views through a tensor
Schatten p-norm plus a bipartite spectral connectivity term, and reads the
final clusters directly off the connected components of the fused graph.
"""

from .anchor_graph import (
    AnchorSet,
    ViewDataset,
    build_all_views,
    build_bipartite,
    check_bipartite,
    select_anchors,
)
from .cli import RunConfig, run_clustering
from .data_io import (
    ClusteringResult,
    DatasetManifest,
    SynthSpec,
    generate_synthetic,
    load_dataset,
    save_results,
)
from .metrics import MetricReport, evaluate_clustering
from .solver import SolverConfig, SolverState, project_rows_to_simplex, solve
from .spectral import (
    ComponentLabeling,
    FusedGraph,
    components,
    force_k_components,
    fuse,
    zero_eig_multiplicity,
    zero_eig_multiplicity_svd,
)
from .tensor_ops import (
    SymmetryViolation,
    fft_mode3,
    gst_shrink,
    ifft_mode3,
    prox_schatten_p,
    schatten_p_norm,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorSet",
    "ClusteringResult",
    "ComponentLabeling",
    "DatasetManifest",
    "FusedGraph",
    "MetricReport",
    "RunConfig",
    "SolverConfig",
    "SolverState",
    "SymmetryViolation",
    "SynthSpec",
    "ViewDataset",
    "build_all_views",
    "build_bipartite",
    "check_bipartite",
    "components",
    "evaluate_clustering",
    "fft_mode3",
    "force_k_components",
    "fuse",
    "generate_synthetic",
    "gst_shrink",
    "ifft_mode3",
    "load_dataset",
    "project_rows_to_simplex",
    "prox_schatten_p",
    "run_clustering",
    "save_results",
    "schatten_p_norm",
    "select_anchors",
    "solve",
    "zero_eig_multiplicity",
    "zero_eig_multiplicity_svd",
]
