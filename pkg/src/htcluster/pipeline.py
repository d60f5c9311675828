"""End-to-end runs: ingest, normalise, metric, filtration, clustering, export.

A :class:`RunConfig` captures everything a run needs; identical configs
(and seeds) produce byte-identical artifacts. Worker parallelism for
pairwise image distances is capped by the ``HTC_THREADS`` environment
variable.
"""
from __future__ import annotations

import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io_formats
from .distance import DistanceMatrix, PointCloud, euclidean_matrix, fermat_matrix
from .errors import ConfigError, DegenerateInputError
from .hierarchy import (
    barcode,
    build_filtration_grid,
    exact_filtration,
    export_dendrogram,
    outlier_ranking,
    run_htc,
)
from .preprocess import NormalizationReference, zscore_normalize
from .transport import GridDistribution, solve_transport

METRICS = ("euclidean", "fermat", "wasserstein")


def worker_count() -> int:
    """Worker cap from ``HTC_THREADS`` (defaults to the CPU count)."""
    raw = os.environ.get("HTC_THREADS")
    if raw is None:
        return max(os.cpu_count() or 1, 1)
    try:
        return max(int(raw), 1)
    except ValueError as exc:
        raise ConfigError(f"HTC_THREADS must be an integer, got {raw!r}") from exc


@dataclass(frozen=True)
class RunConfig:
    """One pipeline invocation: a single input kind plus processing options."""

    points: str | None = None
    distances: str | None = None
    images: tuple[str, ...] = ()
    metric: str | None = None
    alpha: float = 2.0
    p: int = 1
    tol: float = 1e-6
    max_steps: int | None = None
    exact: bool = False
    strict_links: bool = False
    normalize_ref: str | None = None
    factor: float = 3.0
    seed: int = 0
    out_dir: str = "htc-out"

    def __post_init__(self):
        kinds = sum((self.points is not None, self.distances is not None, bool(self.images)))
        if kinds != 1:
            raise ConfigError("exactly one input kind required: --points, --distances or images")
        metric = self.metric
        if self.distances is not None:
            if metric is not None:
                raise ConfigError("precomputed distances take no metric")
        elif self.images:
            if metric not in (None, "wasserstein"):
                raise ConfigError("image input requires the wasserstein metric")
            object.__setattr__(self, "metric", "wasserstein")
        else:
            if metric is None:
                metric = "euclidean"
            if metric not in ("euclidean", "fermat"):
                raise ConfigError("point input supports the euclidean or fermat metric")
            object.__setattr__(self, "metric", metric)
        if self.normalize_ref is not None and self.points is None:
            raise ConfigError("normalization requires point input")
        if self.p not in (1, 2):
            raise ConfigError("p must be 1 or 2")
        if self.alpha < 1:
            raise ConfigError("alpha must be >= 1")


def load_reference(path) -> NormalizationReference:
    """Normalisation statistics fitted on a reference cohort CSV."""
    cohort = io_formats.load_points_csv(path)
    return NormalizationReference.from_samples(cohort.coords, source=str(path))


def wasserstein_matrix(
    images: list[np.ndarray], p: int = 1, tol: float = 1e-6, h: float = 1.0
) -> DistanceMatrix:
    """Pairwise transport distances between images (pixel mass, step ``h``)."""
    dists = [GridDistribution(img, h=h) for img in images]
    n = len(dists)
    if n < 2:
        raise ConfigError("need at least two images")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def solve(pair):
        i, j = pair
        return solve_transport(dists[i], dists[j], p=p, tol=tol).value

    workers = min(worker_count(), len(pairs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(solve, pairs))
    else:
        values = [solve(pair) for pair in pairs]
    out = np.zeros((n, n))
    for (i, j), v in zip(pairs, values):
        out[i, j] = out[j, i] = v
    return DistanceMatrix(out)


def ingest(cfg: RunConfig) -> DistanceMatrix:
    """Resolve the configured input into a distance matrix."""
    if cfg.distances is not None:
        return io_formats.load_distance_csv(cfg.distances)
    if cfg.images:
        images = [io_formats.read_pgm(p) for p in cfg.images]
        return wasserstein_matrix(images, p=cfg.p, tol=cfg.tol)
    pc = io_formats.load_points_csv(cfg.points)
    if cfg.normalize_ref is not None:
        ref = load_reference(cfg.normalize_ref)
        pc = PointCloud(zscore_normalize(pc.coords, ref, factor=cfg.factor), labels=pc.labels)
    if cfg.metric == "fermat":
        return fermat_matrix(pc, alpha=cfg.alpha)
    return euclidean_matrix(pc)


def run_pipeline(cfg: RunConfig) -> dict[str, str]:
    """Execute the configured run and write all artifacts.

    Returns a name-to-path map of the written files.
    """
    dm = ingest(cfg)
    grid = exact_filtration(dm) if cfg.exact else build_filtration_grid(dm, cfg.max_steps)
    hierarchy = run_htc(dm, grid, strict=cfg.strict_links)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    artifacts: dict[str, str] = {}

    def emit(name: str, writer) -> None:
        target = out_dir / name
        writer(target)
        artifacts[name] = str(target)

    emit("hierarchy.json", lambda p: io_formats.export_hierarchy_json(hierarchy, p, dm.labels))
    emit("barcode.csv", lambda p: io_formats.export_barcode(barcode(hierarchy), p))
    emit("betti.csv", lambda p: io_formats.export_betti_csv(hierarchy, p))
    emit(
        "outliers.csv",
        lambda p: io_formats.export_outliers_csv(outlier_ranking(hierarchy), p, dm.labels),
    )
    try:
        tree = export_dendrogram(hierarchy)
    except DegenerateInputError as exc:
        print(f"note: dendrogram skipped: {exc}", file=sys.stderr)
    else:
        emit("dendrogram.json", lambda p: io_formats.export_dendrogram_json(tree, p))
    return artifacts
