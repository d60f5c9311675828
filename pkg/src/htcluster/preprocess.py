"""Data preparation: reference z-scores, low-rank image compression, series generation.

Feature columns are normalised against a reference cohort (subtract the
cohort mean, divide by a multiple of the cohort standard deviation).
Images are compressed by keeping the ``k`` largest singular values of the
pixel matrix, and an image series generator produces the original image, a
sweep of compression levels and optional line-defect copies for distance
studies.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError

# compression sweep: 29 ranks from 10 to 150 in steps of 5
DEFAULT_RANK_SCHEDULE = tuple(10 + 5 * q for q in range(29))


def as_image(img) -> np.ndarray:
    """Validate and convert to a 2-D float pixel matrix.

    Colour inputs (trailing channel axis) are averaged to grayscale.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3:
        arr = arr.mean(axis=2)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InputError("image must be a 2-D pixel matrix")
    if not np.all(np.isfinite(arr)):
        raise InputError("image contains non-finite pixels")
    return arr


@dataclass(frozen=True)
class NormalizationReference:
    """Per-feature means and standard deviations from a reference cohort."""

    means: np.ndarray
    stds: np.ndarray
    source: str = ""

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64).ravel()
        stds = np.asarray(self.stds, dtype=np.float64).ravel()
        if means.shape != stds.shape or means.size == 0:
            raise InputError("means and stds must be matching nonempty vectors")
        if not np.all(np.isfinite(means)) or not np.all(np.isfinite(stds)):
            raise InputError("reference statistics must be finite")
        if np.any(stds < 0):
            raise InputError("standard deviations cannot be negative")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)

    @classmethod
    def from_samples(cls, samples, source: str = "") -> "NormalizationReference":
        data = np.asarray(samples, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] < 2:
            raise InputError("reference cohort needs at least two sample rows")
        return cls(means=data.mean(axis=0), stds=data.std(axis=0), source=source)

    @property
    def n_features(self) -> int:
        return self.means.size

    @property
    def constant_features(self) -> np.ndarray:
        """Indices of features with zero spread (excluded from normalisation)."""
        return np.flatnonzero(self.stds == 0)


def zscore_normalize(data, ref: NormalizationReference, factor: float = 3.0) -> np.ndarray:
    """Normalise columns as ``(x - mean) / (factor * std)`` against the reference.

    Zero-spread reference columns are dropped from the output with a
    warning; use ``ref.constant_features`` to map columns back.
    """
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise InputError("data must be a 2-D matrix")
    if x.shape[1] != ref.n_features:
        raise InputError(
            f"data has {x.shape[1]} columns but the reference describes {ref.n_features}"
        )
    if not (factor > 0):
        raise InputError("factor must be positive")
    keep = ref.stds > 0
    dropped = np.flatnonzero(~keep)
    if dropped.size:
        warnings.warn(
            f"dropping {dropped.size} constant reference column(s): {dropped.tolist()}",
            stacklevel=2,
        )
    return (x[:, keep] - ref.means[keep]) / (factor * ref.stds[keep])


def svd_compress(img, k: int) -> np.ndarray:
    """Best rank-``k`` approximation of a pixel matrix in the Frobenius norm.

    Keeps the ``k`` largest singular values of the decomposition; the
    reconstruction error equals the root of the discarded squared singular
    values.
    """
    m = as_image(img)
    max_rank = min(m.shape)
    if not 1 <= int(k) <= max_rank:
        raise InputError(f"rank k must be in [1, {max_rank}], got {k}")
    k = int(k)
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    return (u[:, :k] * s[:k]) @ vt[:k]


@dataclass(frozen=True)
class LineDefect:
    """A constant-intensity line band drawn over an image."""

    orientation: str  # "row" or "col"
    index: int
    thickness: int = 1
    intensity: float = 0.0

    def __post_init__(self):
        if self.orientation not in ("row", "col"):
            raise InputError("orientation must be 'row' or 'col'")
        if self.thickness < 1:
            raise InputError("thickness must be >= 1")


def inject_line(img, defect: LineDefect) -> np.ndarray:
    """Copy of the image with the defect band overwritten."""
    m = as_image(img).copy()
    limit = m.shape[0] if defect.orientation == "row" else m.shape[1]
    lo, hi = defect.index, defect.index + defect.thickness
    if lo < 0 or hi > limit:
        raise InputError(f"line band [{lo}, {hi}) outside image extent {limit}")
    if defect.orientation == "row":
        m[lo:hi, :] = defect.intensity
    else:
        m[:, lo:hi] = defect.intensity
    return m


def generate_image_series(
    img,
    schedule: tuple[int, ...] | None = None,
    defect: LineDefect | None = None,
    defect_targets: tuple[int, ...] = (-1, 0),
) -> list[np.ndarray]:
    """Original image, one compressed copy per schedule rank, defect copies.

    The base series is the input image followed by its rank-``k``
    compressions for each ``k`` in the schedule (default
    ``10, 15, ..., 150``). When a defect is given, a defect-injected copy of
    each ``defect_targets`` member of the base series is appended, in order
    (default: last compressed image, then the original), so the default
    29-rank schedule with a defect yields 32 images.
    """
    base_img = as_image(img)
    if schedule is None:
        schedule = DEFAULT_RANK_SCHEDULE
    series = [base_img]
    for k in schedule:
        series.append(svd_compress(base_img, k))
    if defect is not None:
        base_series = list(series)
        count = len(base_series)
        for t in defect_targets:
            if not -count <= t < count:
                raise InputError(f"defect target {t} outside the series of {count} images")
            series.append(inject_line(base_series[t], defect))
    return series
