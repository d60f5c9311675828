"""File ingestion and export: CSV tables, JSON trees, plain PGM rasters.

All exports are deterministic byte streams: floats are written with their
shortest round-trip representation, item indices are 1-based, and the
infinite bar death is spelled ``inf``. Every exporter has a matching loader
and the pairs round-trip losslessly.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .dendrogram import Dendrogram, DendrogramMerge
from .distance import DistanceMatrix, PointCloud
from .errors import InputError
from .hierarchy import (
    Bar,
    Barcode,
    ClusterHierarchy,
    ExactFiltration,
    FiltrationGrid,
    MergeEvent,
    Partition,
)

_SYM_TOL = 1e-9


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return repr(float(x))


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _read_rows(path, uniform: bool = True) -> list[list[str]]:
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise InputError(f"{path}: empty file")
    if uniform:
        width = len(rows[0])
        for k, row in enumerate(rows):
            if len(row) != width:
                raise InputError(f"{path}: row {k + 1} has {len(row)} cells, expected {width}")
    return [[c.strip() for c in row] for row in rows]


def load_points_csv(path) -> PointCloud:
    """Point cloud from a CSV file, one row per item.

    A first row with any non-numeric cell is treated as a header; a
    non-numeric first column provides item labels. The header may omit the
    label column.
    """
    rows = _read_rows(path, uniform=False)
    header = not all(_is_number(c) for c in rows[0])
    data_rows = rows[1:] if header else rows
    if not data_rows:
        raise InputError(f"{path}: no data rows")
    width = len(data_rows[0])
    for k, row in enumerate(data_rows):
        if len(row) != width:
            raise InputError(
                f"{path}: row {k + 1 + (1 if header else 0)} has {len(row)} cells, expected {width}"
            )
    label_col = any(not _is_number(r[0]) for r in data_rows)
    if header and len(rows[0]) not in (width, width - (1 if label_col else 0)):
        raise InputError(f"{path}: header has {len(rows[0])} cells, expected {width}")
    labels = tuple(r[0] for r in data_rows) if label_col else None
    coords = []
    offset = 1 if label_col else 0
    header_rows = 1 if header else 0
    for k, row in enumerate(data_rows):
        vals = []
        for c, cell in enumerate(row[offset:]):
            if not _is_number(cell):
                raise InputError(
                    f"{path}: non-numeric cell at row {k + 1 + header_rows}, column {c + 1 + offset}"
                )
            vals.append(float(cell))
        coords.append(vals)
    if not coords or not coords[0]:
        raise InputError(f"{path}: no numeric columns")
    return PointCloud(np.asarray(coords), labels=labels)


def load_distance_csv(path) -> DistanceMatrix:
    """Distance matrix from a square numeric CSV.

    Asymmetry and diagonal offsets within 1e-9 are repaired (averaged /
    zeroed); larger violations and negative entries are errors.
    """
    rows = _read_rows(path)
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise InputError(f"{path}: matrix is not square ({n} rows, {len(rows[0])} columns)")
    vals = np.empty((n, n))
    for i, row in enumerate(rows):
        for j, cell in enumerate(row):
            if not _is_number(cell):
                raise InputError(f"{path}: non-numeric cell at row {i + 1}, column {j + 1}")
            vals[i, j] = float(cell)
    if np.any(vals < 0):
        raise InputError(f"{path}: negative distances present")
    asym = float(np.abs(vals - vals.T).max(initial=0.0))
    if asym > _SYM_TOL:
        raise InputError(f"{path}: asymmetry {asym:.3e} exceeds {_SYM_TOL:g}")
    vals = (vals + vals.T) / 2.0
    diag = float(np.abs(np.diagonal(vals)).max(initial=0.0))
    if diag > _SYM_TOL:
        raise InputError(f"{path}: nonzero diagonal (max {diag:.3e})")
    np.fill_diagonal(vals, 0.0)
    return DistanceMatrix(vals)


def save_distance_csv(dm: DistanceMatrix, path) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        for row in dm.values:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _validate_partition(p: Partition, n: int) -> None:
    seen: set[int] = set()
    for cluster in p.clusters:
        if not cluster:
            raise InputError("empty cluster in partition")
        for i in cluster:
            if i in seen:
                raise InputError("overlapping clusters in partition")
            seen.add(i)
    if seen != set(range(n)):
        raise InputError("partition does not cover all items")


def _grid_payload(grid: FiltrationGrid | ExactFiltration) -> dict:
    if isinstance(grid, FiltrationGrid):
        return {
            "kind": "uniform",
            "r_max": grid.r_max,
            "r_min": grid.r_min,
            "steps": grid.step_count,
            "h": grid.step,
        }
    return {
        "kind": "exact",
        "r_max": grid.r_max,
        "r_min": grid.r_min,
        "steps": grid.step_count,
        "h": None,
        "values": [float(v) for v in grid.values],
    }


def _grid_from_payload(payload: dict) -> FiltrationGrid | ExactFiltration:
    if payload["kind"] == "uniform":
        m = int(payload["steps"])
        h = float(payload["h"])
        values = h * np.arange(m + 1, dtype=np.float64)
        values[-1] = float(payload["r_max"])
        return FiltrationGrid(
            r_max=float(payload["r_max"]),
            r_min=float(payload["r_min"]),
            step_count=m,
            step=h,
            values=values,
        )
    return ExactFiltration(np.asarray(payload["values"], dtype=np.float64))


def export_hierarchy_json(h: ClusterHierarchy, path, labels: tuple[str, ...] | None = None) -> None:
    """Write the full hierarchy (grid, per-level memberships, merges) as JSON.

    Item indices are 1-based. Level partitions are validated before writing.
    """
    for level in h.levels:
        _validate_partition(level, h.n_items)
    if labels is not None and len(labels) != h.n_items:
        raise InputError("label count does not match item count")
    doc = {
        "n_items": h.n_items,
        "strict_links": h.strict_links,
        "labels": list(labels) if labels is not None else None,
        "grid": _grid_payload(h.grid),
        "levels": [
            {
                "r": level.level,
                "clusters": [[i + 1 for i in cluster] for cluster in level.clusters],
            }
            for level in h.levels
        ],
        "merges": [
            {
                "level": ev.level,
                "absorbed": [i + 1 for i in ev.absorbed],
                "result": ev.result + 1,
            }
            for ev in h.merges
        ],
    }
    write_json(doc, path)


def load_hierarchy_json(path) -> tuple[ClusterHierarchy, tuple[str, ...] | None]:
    doc = read_json(path)
    levels = tuple(
        Partition(
            level=float(entry["r"]),
            clusters=tuple(tuple(i - 1 for i in cluster) for cluster in entry["clusters"]),
        )
        for entry in doc["levels"]
    )
    merges = tuple(
        MergeEvent(
            level=float(entry["level"]),
            absorbed=tuple(i - 1 for i in entry["absorbed"]),
            result=int(entry["result"]) - 1,
        )
        for entry in doc["merges"]
    )
    hierarchy = ClusterHierarchy(
        grid=_grid_from_payload(doc["grid"]),
        levels=levels,
        merges=merges,
        n_items=int(doc["n_items"]),
        strict_links=bool(doc["strict_links"]),
    )
    labels = tuple(doc["labels"]) if doc.get("labels") else None
    return hierarchy, labels


def export_barcode(b: Barcode, path) -> None:
    """Write ``representative,birth,death`` rows, longest-lived bars first."""
    bars = sorted(b.intervals, key=lambda bar: (-bar.death, bar.representative))
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("representative,birth,death\n")
        for bar in bars:
            fh.write(f"{bar.representative + 1},{_fmt(bar.birth)},{_fmt(bar.death)}\n")


def load_barcode_csv(path) -> Barcode:
    rows = _read_rows(path)
    if rows[0] != ["representative", "birth", "death"]:
        raise InputError(f"{path}: not a barcode file")
    bars = []
    for rep, birth, death in rows[1:]:
        bars.append(
            Bar(
                birth=float(birth),
                death=math.inf if death == "inf" else float(death),
                representative=int(rep) - 1,
            )
        )
    return Barcode(intervals=tuple(bars))


def export_dendrogram_json(dend: Dendrogram, path) -> None:
    """Write the merge tree as JSON; leaves are 1-based, internal nodes follow."""
    doc = {
        "leaf_count": dend.leaf_count,
        "merges": [
            {"height": m.height, "children": [c + 1 for c in m.children]} for m in dend.merges
        ],
    }
    write_json(doc, path)


def load_dendrogram_json(path) -> Dendrogram:
    doc = read_json(path)
    return Dendrogram(
        leaf_count=int(doc["leaf_count"]),
        merges=tuple(
            DendrogramMerge(
                height=float(m["height"]), children=tuple(int(c) - 1 for c in m["children"])
            )
            for m in doc["merges"]
        ),
    )


def export_outliers_csv(entries, path, labels: tuple[str, ...] | None = None) -> None:
    """Write the outlier ranking as ``rank,level,size,members`` rows."""

    def name(i: int) -> str:
        return labels[i] if labels is not None else str(i + 1)

    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("rank,level,size,members\n")
        for rank, (members, level) in enumerate(entries, start=1):
            joined = ";".join(name(i) for i in members)
            fh.write(f"{rank},{_fmt(level)},{len(members)},{joined}\n")


def export_betti_csv(h: ClusterHierarchy, path) -> None:
    """Write the cluster count per emitted filtration level."""
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("r,clusters\n")
        for level in h.levels:
            fh.write(f"{_fmt(level.level)},{len(level.clusters)}\n")


def write_json(doc, path) -> None:
    try:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from exc


def read_pgm(path) -> np.ndarray:
    """Read a plain (P2) portable graymap into a float pixel matrix."""
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    tokens: list[str] = []
    for line in text.splitlines():
        body = line.split("#", 1)[0]
        tokens.extend(body.split())
    if not tokens or tokens[0] != "P2":
        raise InputError(f"{path}: only plain PGM (P2) rasters are supported")
    if len(tokens) < 4:
        raise InputError(f"{path}: truncated PGM header")
    try:
        cols, rows, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
        pixels = [int(t) for t in tokens[4:]]
    except ValueError as exc:
        raise InputError(f"{path}: malformed PGM token: {exc}") from exc
    if cols < 1 or rows < 1 or maxval < 1:
        raise InputError(f"{path}: invalid PGM dimensions")
    if len(pixels) != rows * cols:
        raise InputError(f"{path}: expected {rows * cols} pixels, found {len(pixels)}")
    if any(p < 0 or p > maxval for p in pixels):
        raise InputError(f"{path}: pixel outside [0, {maxval}]")
    return np.asarray(pixels, dtype=np.float64).reshape(rows, cols)


def write_pgm(img, path, maxval: int = 255) -> None:
    """Write a pixel matrix as plain PGM, clamping and rounding to integers."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise InputError("image must be a 2-D pixel matrix")
    if maxval < 1 or maxval > 65535:
        raise InputError("maxval must be in [1, 65535]")
    ints = np.clip(np.rint(arr), 0, maxval).astype(np.int64)
    rows, cols = ints.shape
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write(f"P2\n{cols} {rows}\n{maxval}\n")
        for row in ints:
            fh.write(" ".join(str(v) for v in row) + "\n")
