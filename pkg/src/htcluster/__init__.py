"""Hierarchical topological clustering toolkit.

Clusters are the connected components of distance-threshold graphs swept
across a filtration of scales; the toolkit tracks every component's
membership, merge events, lifetimes (barcodes) and outlier persistence,
and ships the distance functions, preprocessing steps and baseline
algorithms used alongside that analysis.
"""
from .accel import COMPILED
from .baselines import (
    NOISE,
    DbscanResult,
    KMeansResult,
    cophenetic_correlation,
    dbscan,
    hc_agglomerative,
    kmeans,
    select_best_linkage,
)
from .dendrogram import Dendrogram, DendrogramMerge, cophenetic_matrix
from .distance import DistanceMatrix, PointCloud, euclidean_matrix, fermat_matrix
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateInputError,
    HtclusterError,
    InputError,
)
from .hierarchy import (
    Bar,
    Barcode,
    ClusterHierarchy,
    ExactFiltration,
    FiltrationGrid,
    MergeEvent,
    Partition,
    barcode,
    betti0,
    build_filtration_grid,
    cluster_link_matrix,
    exact_filtration,
    export_dendrogram,
    merge_step,
    outlier_ranking,
    point_link_matrix,
    run_htc,
)
from .pipeline import RunConfig, run_pipeline, wasserstein_matrix
from .preprocess import (
    DEFAULT_RANK_SCHEDULE,
    LineDefect,
    NormalizationReference,
    generate_image_series,
    inject_line,
    svd_compress,
    zscore_normalize,
)
from .transport import GridDistribution, TransportResult, solve_transport, wasserstein_grid

__version__ = "0.1.0"

__all__ = [
    "Bar",
    "Barcode",
    "ClusterHierarchy",
    "COMPILED",
    "ConfigError",
    "ConvergenceError",
    "DEFAULT_RANK_SCHEDULE",
    "DbscanResult",
    "DegenerateInputError",
    "Dendrogram",
    "DendrogramMerge",
    "DistanceMatrix",
    "ExactFiltration",
    "FiltrationGrid",
    "GridDistribution",
    "HtclusterError",
    "InputError",
    "KMeansResult",
    "LineDefect",
    "MergeEvent",
    "NOISE",
    "NormalizationReference",
    "Partition",
    "PointCloud",
    "RunConfig",
    "TransportResult",
    "barcode",
    "betti0",
    "build_filtration_grid",
    "cluster_link_matrix",
    "cophenetic_correlation",
    "cophenetic_matrix",
    "dbscan",
    "euclidean_matrix",
    "exact_filtration",
    "export_dendrogram",
    "fermat_matrix",
    "generate_image_series",
    "hc_agglomerative",
    "inject_line",
    "kmeans",
    "merge_step",
    "outlier_ranking",
    "point_link_matrix",
    "run_htc",
    "run_pipeline",
    "select_best_linkage",
    "solve_transport",
    "svd_compress",
    "wasserstein_grid",
    "wasserstein_matrix",
    "zscore_normalize",
]
