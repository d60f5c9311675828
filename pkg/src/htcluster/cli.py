"""Command line surface.

Subcommands: ``run`` (full clustering pipeline), ``barcode``, ``baseline
kmeans|hc|dbscan``, ``distance euclidean|fermat|wasserstein``, ``compress
svd`` and ``series generate``. Failures exit nonzero with a single
``error: <category>: <message>`` line on stderr.
"""
from __future__ import annotations

import sys
from pathlib import Path

import click

from . import io_formats
from .baselines import LINKAGES, NOISE, dbscan, hc_agglomerative, kmeans, select_best_linkage
from .baselines import cophenetic_correlation
from .distance import euclidean_matrix, fermat_matrix
from .errors import ConfigError, HtclusterError
from .hierarchy import barcode, build_filtration_grid, exact_filtration, run_htc
from .pipeline import RunConfig, ingest, run_pipeline, wasserstein_matrix
from .preprocess import DEFAULT_RANK_SCHEDULE, LineDefect, generate_image_series, svd_compress


@click.group()
def htc():
    """Hierarchical topological clustering toolkit."""


_input_options = [
    click.option("--points", type=click.Path(exists=True, dir_okay=False), default=None),
    click.option("--distances", type=click.Path(exists=True, dir_okay=False), default=None),
    click.option("--images", type=click.Path(exists=True, dir_okay=False), multiple=True),
    click.option("--metric", type=click.Choice(["euclidean", "fermat", "wasserstein"]), default=None),
    click.option("--alpha", type=float, default=2.0, show_default=True),
    click.option("--p", type=int, default=1, show_default=True),
    click.option("--tol", type=float, default=1e-6, show_default=True),
    click.option("--max-steps", type=int, default=None),
    click.option("--exact", is_flag=True, help="Filter through every distinct distance."),
    click.option("--strict-links", is_flag=True, help="Link pairs with d < r instead of d <= r."),
    click.option("--normalize-ref", type=click.Path(exists=True, dir_okay=False), default=None),
    click.option("--factor", type=float, default=3.0, show_default=True),
    click.option("--seed", type=int, default=0, show_default=True),
    click.option("--out-dir", type=click.Path(file_okay=False), default="htc-out", show_default=True),
]


def _with_options(options):
    def wrap(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn

    return wrap


def _config(**kw) -> RunConfig:
    return RunConfig(
        points=kw["points"],
        distances=kw["distances"],
        images=tuple(kw["images"]),
        metric=kw["metric"],
        alpha=kw["alpha"],
        p=kw["p"],
        tol=kw["tol"],
        max_steps=kw["max_steps"],
        exact=kw["exact"],
        strict_links=kw["strict_links"],
        normalize_ref=kw["normalize_ref"],
        factor=kw["factor"],
        seed=kw["seed"],
        out_dir=kw["out_dir"],
    )


@htc.command()
@_with_options(_input_options)
def run(**kw):
    """Cluster the input and write hierarchy, barcode, dendrogram and rankings."""
    artifacts = run_pipeline(_config(**kw))
    for name in sorted(artifacts):
        click.echo(f"wrote {artifacts[name]}")


@htc.command(name="barcode")
@_with_options(_input_options)
def barcode_cmd(**kw):
    """Write only the component-lifetime barcode for the input."""
    cfg = _config(**kw)
    dm = ingest(cfg)
    grid = exact_filtration(dm) if cfg.exact else build_filtration_grid(dm, cfg.max_steps)
    hierarchy = run_htc(dm, grid, strict=cfg.strict_links)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / "barcode.csv"
    io_formats.export_barcode(barcode(hierarchy), target)
    click.echo(f"wrote {target}")


@htc.group()
def baseline():
    """Comparison clustering algorithms."""


def _load_dm(points, distances, metric, alpha):
    if (points is None) == (distances is None):
        raise ConfigError("provide exactly one of --points or --distances")
    if distances is not None:
        return io_formats.load_distance_csv(distances), None
    pc = io_formats.load_points_csv(points)
    dm = fermat_matrix(pc, alpha=alpha) if metric == "fermat" else euclidean_matrix(pc)
    return dm, pc


def _write_assignments(path, ids, labels, render):
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        if labels is not None:
            fh.write("item,label,cluster\n")
            for i, cid in enumerate(ids):
                fh.write(f"{i + 1},{labels[i]},{render(cid)}\n")
        else:
            fh.write("item,cluster\n")
            for i, cid in enumerate(ids):
                fh.write(f"{i + 1},{render(cid)}\n")


@baseline.command(name="kmeans")
@click.option("--points", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--k", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-iter", type=int, default=300, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default="htc-out", show_default=True)
def baseline_kmeans(points, k, seed, max_iter, out_dir):
    """Seeded Lloyd iteration on a point CSV."""
    pc = io_formats.load_points_csv(points)
    result = kmeans(pc, k=k, seed=seed, max_iter=max_iter)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_assignments(out / "assignments.csv", result.assignments, pc.labels, lambda c: str(c + 1))
    with open(out / "centroids.csv", "w", newline="\n", encoding="utf-8") as fh:
        for row in result.centroids:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    io_formats.write_json(
        {
            "algorithm": "kmeans",
            "k": k,
            "seed": result.seed,
            "iterations": result.iterations,
            "objective": result.objective,
        },
        out / "summary.json",
    )
    click.echo(f"wrote {out / 'assignments.csv'}")


@baseline.command(name="hc")
@click.option("--points", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--distances", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--metric", type=click.Choice(["euclidean", "fermat"]), default="euclidean")
@click.option("--alpha", type=float, default=2.0, show_default=True)
@click.option(
    "--linkage",
    type=click.Choice(("auto",) + LINKAGES),
    default="auto",
    show_default=True,
    help="'auto' picks the linkage with the highest cophenetic correlation.",
)
@click.option("--out-dir", type=click.Path(file_okay=False), default="htc-out", show_default=True)
def baseline_hc(points, distances, metric, alpha, linkage, out_dir):
    """Agglomerative clustering; writes the dendrogram and its quality score."""
    dm, _ = _load_dm(points, distances, metric, alpha)
    if linkage == "auto":
        linkage, coefficient = select_best_linkage(dm)
        dend = hc_agglomerative(dm, linkage)
    else:
        dend = hc_agglomerative(dm, linkage)
        coefficient = cophenetic_correlation(dm, dend)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io_formats.export_dendrogram_json(dend, out / "dendrogram.json")
    io_formats.write_json(
        {"algorithm": "hc", "linkage": linkage, "cophenetic_correlation": coefficient},
        out / "summary.json",
    )
    click.echo(f"wrote {out / 'dendrogram.json'} (linkage={linkage})")


@baseline.command(name="dbscan")
@click.option("--points", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--distances", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--metric", type=click.Choice(["euclidean", "fermat"]), default="euclidean")
@click.option("--alpha", type=float, default=2.0, show_default=True)
@click.option("--eps", type=float, required=True)
@click.option("--min-pts", type=int, required=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default="htc-out", show_default=True)
def baseline_dbscan(points, distances, metric, alpha, eps, min_pts, out_dir):
    """Density clustering; unassigned items are labelled NOISE."""
    dm, pc = _load_dm(points, distances, metric, alpha)
    result = dbscan(dm, eps=eps, min_pts=min_pts)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    labels = pc.labels if pc is not None else dm.labels
    _write_assignments(
        out / "assignments.csv",
        result.assignments,
        labels,
        lambda c: "NOISE" if c == NOISE else str(c + 1),
    )
    io_formats.write_json(
        {
            "algorithm": "dbscan",
            "eps": eps,
            "min_pts": min_pts,
            "clusters": result.n_clusters,
            "noise": int((result.assignments == NOISE).sum()),
        },
        out / "summary.json",
    )
    click.echo(f"wrote {out / 'assignments.csv'}")


@htc.group()
def distance():
    """Standalone distance-matrix computation."""


@distance.command(name="euclidean")
@click.option("--points", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), default="distances.csv", show_default=True)
def distance_euclidean(points, out):
    dm = euclidean_matrix(io_formats.load_points_csv(points))
    io_formats.save_distance_csv(dm, out)
    click.echo(f"wrote {out}")


@distance.command(name="fermat")
@click.option("--points", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--alpha", type=float, default=2.0, show_default=True)
@click.option("--neighbors", type=int, default=None, help="Approximate via a k-NN hop graph.")
@click.option("--out", type=click.Path(dir_okay=False), default="distances.csv", show_default=True)
def distance_fermat(points, alpha, neighbors, out):
    dm = fermat_matrix(io_formats.load_points_csv(points), alpha=alpha, neighbors=neighbors)
    io_formats.save_distance_csv(dm, out)
    click.echo(f"wrote {out}")


@distance.command(name="wasserstein")
@click.argument("images", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--p", type=int, default=1, show_default=True)
@click.option("--tol", type=float, default=1e-6, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="distances.csv", show_default=True)
def distance_wasserstein(images, p, tol, out):
    """Pairwise transport distances between plain PGM images."""
    mats = [io_formats.read_pgm(path) for path in images]
    dm = wasserstein_matrix(mats, p=p, tol=tol)
    io_formats.save_distance_csv(dm, out)
    click.echo(f"wrote {out}")


@htc.group()
def compress():
    """Image compression utilities."""


@compress.command(name="svd")
@click.option("--image", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--k", type=int, required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--maxval", type=int, default=255, show_default=True)
def compress_svd(image, k, out, maxval):
    """Write the best rank-k approximation of a plain PGM image."""
    img = io_formats.read_pgm(image)
    io_formats.write_pgm(svd_compress(img, k), out, maxval=maxval)
    click.echo(f"wrote {out}")


@htc.group()
def series():
    """Image-series generation."""


def _parse_defect(spec: str) -> LineDefect:
    parts = spec.split(":")
    if len(parts) < 2 or parts[0] not in ("row", "col"):
        raise ConfigError("defect spec is ORIENTATION:INDEX[:THICKNESS[:INTENSITY]]")
    try:
        index = int(parts[1])
        thickness = int(parts[2]) if len(parts) > 2 else 1
        intensity = float(parts[3]) if len(parts) > 3 else 0.0
    except ValueError as exc:
        raise ConfigError(f"bad defect spec {spec!r}: {exc}") from exc
    return LineDefect(orientation=parts[0], index=index, thickness=thickness, intensity=intensity)


@series.command(name="generate")
@click.option("--image", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--ks", default=None, help="Comma-separated ranks (default 10,15,...,150).")
@click.option("--defect", default=None, help="Line defect ORIENTATION:INDEX[:THICKNESS[:INTENSITY]].")
@click.option(
    "--defect-target",
    "defect_targets",
    type=int,
    multiple=True,
    help="Base-series positions to copy with the defect (default: -1 then 0).",
)
@click.option("--maxval", type=int, default=255, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default="htc-series", show_default=True)
def series_generate(image, ks, defect, defect_targets, maxval, out_dir):
    """Write the original, a compression sweep, and optional defect copies."""
    img = io_formats.read_pgm(image)
    if ks is not None:
        try:
            schedule = tuple(int(tok) for tok in ks.split(",") if tok.strip())
        except ValueError as exc:
            raise ConfigError(f"bad rank list {ks!r}: {exc}") from exc
    else:
        schedule = DEFAULT_RANK_SCHEDULE
    line = _parse_defect(defect) if defect is not None else None
    targets = tuple(defect_targets) if defect_targets else (-1, 0)
    imgs = generate_image_series(img, schedule=schedule, defect=line, defect_targets=targets)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = []
    for idx, member in enumerate(imgs, start=1):
        name = f"image_{idx:02d}.pgm"
        io_formats.write_pgm(member, out / name, maxval=maxval)
        names.append(name)
    roles = ["original"] + [f"rank-{k}" for k in schedule]
    if line is not None:
        roles += [f"defect-of-{(t % len(roles)) + 1}" for t in targets]
    io_formats.write_json(
        {"images": names, "roles": roles, "schedule": list(schedule)},
        out / "manifest.json",
    )
    click.echo(f"wrote {len(names)} images to {out}")


def main(argv=None) -> int:
    try:
        htc.main(args=argv, standalone_mode=False)
    except HtclusterError as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return 1
    except click.ClickException as exc:
        print(f"error: usage: {exc.format_message()}", file=sys.stderr)
        return 2
    except click.exceptions.Abort:
        return 130
    return 0


if __name__ == "__main__":
    sys.exit(main())
