"""Shared domain types, CSV dataset loading, and the WCSS evaluator.

Everything here is immutable after construction and safe to share across
workers; the operations are pure functions of their inputs.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    DpGridKmError,
    OutOfDomainError,
    ParseError,
)


@dataclass(frozen=True)
class DomainBounds:
    """Data domain [-r, r]^d: half-width `r` per axis, dimension `d`."""

    r: float
    d: int

    def __post_init__(self):
        if self.r <= 0:
            raise DpGridKmError(f"domain half-width must be positive, got {self.r}")
        if self.d < 1:
            raise DpGridKmError(f"dimension must be >= 1, got {self.d}")
        if self.d == 1:
            # Grid sizing assumes d >= 2; plain clustering still works at d = 1.
            warnings.warn("d=1 domain: grid-size selection is not supported", stacklevel=2)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of rows that lie inside [-r, r]^d."""
        pts = np.atleast_2d(points)
        return (np.abs(pts) <= self.r).all(axis=1)


@dataclass(frozen=True)
class PrivacyBudget:
    """Privacy budget epsilon > 0 for one release."""

    epsilon: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise DpGridKmError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True, eq=False)
class Dataset:
    """N points inside a bounded domain, in a fixed order."""

    points: np.ndarray
    bounds: DomainBounds

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise DpGridKmError("dataset needs a non-empty (N, d) point array")
        if pts.shape[1] != self.bounds.d:
            raise DimensionMismatchError(
                f"points have dimension {pts.shape[1]}, bounds declare {self.bounds.d}"
            )
        if not self.bounds.contains(pts).all():
            raise OutOfDomainError("dataset contains points outside the domain")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """K centroids with per-cluster WCSS, the averaged objective, and the assignment."""

    centroids: np.ndarray
    per_cluster_wcss: np.ndarray
    objective: float
    assignment: np.ndarray

    def __post_init__(self):
        cents = np.asarray(self.centroids, dtype=np.float64)
        wcss = np.asarray(self.per_cluster_wcss, dtype=np.float64)
        assign = np.asarray(self.assignment, dtype=np.int64)
        if cents.ndim != 2 or cents.shape[0] < 1:
            raise DpGridKmError("centroids must be a non-empty (K, d) array")
        k = cents.shape[0]
        if wcss.shape != (k,):
            raise DpGridKmError("per_cluster_wcss must have one entry per centroid")
        if (wcss < 0).any() or self.objective < 0:
            raise DpGridKmError("WCSS terms must be non-negative")
        if assign.size and (assign.min() < 0 or assign.max() >= k):
            raise DpGridKmError("assignment indices must lie in [0, K)")
        for name, arr in (("centroids", cents), ("per_cluster_wcss", wcss), ("assignment", assign)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


def _parse_row(cells: list[str], row_no: int, d: int) -> list[float]:
    if len(cells) != d:
        raise ParseError(
            f"row {row_no}: expected {d} columns, got {len(cells)}", row=row_no
        )
    values = []
    for col, cell in enumerate(cells, start=1):
        try:
            values.append(float(cell))
        except ValueError:
            raise ParseError(
                f"row {row_no}, column {col}: non-numeric cell {cell!r}",
                row=row_no,
                column=col,
            ) from None
    return values


def _is_numeric_row(cells: list[str]) -> bool:
    try:
        for cell in cells:
            float(cell)
    except ValueError:
        return False
    return len(cells) > 0


def load_dataset(path, bounds: DomainBounds, clip: bool = False) -> Dataset:
    """Load a CSV file of d numeric columns into a bounded Dataset.

    A single header row is auto-detected (first row containing any
    non-numeric token).  With `clip=True` out-of-range coordinates are
    clamped onto the domain boundary; with `clip=False` the first violation
    raises, reporting its row and column.
    """
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for line_no, cells in enumerate(reader, start=1):
            cells = [c.strip() for c in cells]
            if not any(cells):
                continue
            if line_no == 1 and not _is_numeric_row(cells):
                continue  # header
            rows.append(_parse_row(cells, line_no, bounds.d))
    if not rows:
        raise ParseError(f"{path}: no data rows", row=0)
    points = np.asarray(rows, dtype=np.float64)
    if clip:
        points = np.clip(points, -bounds.r, bounds.r)
    else:
        bad = np.argwhere(np.abs(points) > bounds.r)
        if bad.size:
            i, j = bad[0]
            raise OutOfDomainError(
                f"row {i + 1}, column {j + 1}: coordinate {points[i, j]} is outside "
                f"[-{bounds.r}, {bounds.r}]",
                row=int(i + 1),
                column=int(j + 1),
            )
    return Dataset(points=points, bounds=bounds)


def squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """(N, K) matrix of squared Euclidean distances."""
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def evaluate_wcss(data: Dataset, centroids: np.ndarray) -> ClusterModel:
    """Score given centroids against raw data under the averaged WCSS objective.

    Each point joins its nearest centroid (ties to the lowest index) and the
    objective is (1/K) * sum_i sum_{x in cluster i} ||x - c_i||^2.  Centroids
    are scored as given, never re-centered: this is how released private
    centroids are measured against the raw data.
    """
    cents = np.asarray(centroids, dtype=np.float64)
    if cents.ndim != 2 or cents.shape[1] != data.bounds.d:
        raise DimensionMismatchError(
            f"centroids must be (K, {data.bounds.d}), got shape {cents.shape}"
        )
    k = cents.shape[0]
    if k < 1:
        raise DpGridKmError("need at least one centroid")
    d2 = squared_distances(data.points, cents)
    assignment = np.argmin(d2, axis=1)
    nearest = d2[np.arange(data.n), assignment]
    per_cluster = np.bincount(assignment, weights=nearest, minlength=k)
    objective = float(per_cluster.sum() / k)
    return ClusterModel(
        centroids=cents.copy(),
        per_cluster_wcss=per_cluster,
        objective=objective,
        assignment=assignment,
    )
