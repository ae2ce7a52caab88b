"""Weighted Lloyd over grid synopses, plain Lloyd, and the DPLloyd baseline.

The weighted variant is the clustering stage of the non-interactive grid
pipelines: its inputs are exactly the grid cell centers and the noisy counts,
never the raw points.  Negative noisy weights are clamped to zero in all
arithmetic so centroid updates stay convex combinations; the raw values are
kept on the input type for diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import ClusterModel, Dataset, DomainBounds, evaluate_wcss, squared_distances
from .errors import (
    AllWeightsNonPositiveError,
    DimensionMismatchError,
    DpGridKmError,
    KExceedsDistinctPointsError,
    KExceedsNError,
)
from .noise import laplace_from, mix


@dataclass(frozen=True, eq=False)
class WeightedPointSet:
    """Grid cell centers with (possibly negative) noisy counts as weights."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise DpGridKmError("points must be a non-empty (M, d) array")
        if w.shape != (pts.shape[0],):
            raise DimensionMismatchError("need exactly one weight per point")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def effective_weights(self) -> np.ndarray:
        """Weights used in arithmetic: negatives clamp to zero."""
        return np.maximum(self.weights, 0.0)


@dataclass(frozen=True)
class LloydConfig:
    k: int
    max_iterations: int = 100
    tolerance: float = 1e-6
    restarts: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.max_iterations < 1 or self.restarts < 1:
            raise DpGridKmError("k, max_iterations and restarts must all be >= 1")
        if self.tolerance < 0:
            raise DpGridKmError("tolerance must be non-negative")


@dataclass(frozen=True)
class DpLloydConfig:
    k: int
    total_epsilon: float
    bounds: DomainBounds
    iterations: int = 5
    count_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.iterations < 1:
            raise DpGridKmError("k and iterations must be >= 1")
        if self.total_epsilon <= 0:
            raise DpGridKmError("total_epsilon must be positive")
        if not (0.0 < self.count_fraction < 1.0):
            raise DpGridKmError("count_fraction must lie in (0, 1)")


def _kmeanspp_init(
    points: np.ndarray, weights: np.ndarray, k: int, rng: np.random.Generator
) -> np.ndarray:
    """Weighted k-means++ seeding.

    First center sampled proportional to weight, later ones proportional to
    weight * D^2 where D is the distance to the nearest chosen center.  If
    that score mass vanishes (all remaining weight sits on chosen centers),
    fall back to the farthest point, ties to the lowest index.
    """
    n = points.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.choice(n, p=weights / weights.sum())
    d2 = squared_distances(points, points[chosen[0]][None, :])[:, 0]
    for i in range(1, k):
        scores = weights * d2
        total = scores.sum()
        if total > 0.0:
            chosen[i] = rng.choice(n, p=scores / total)
        else:
            chosen[i] = int(np.argmax(d2))
        new_d2 = squared_distances(points, points[chosen[i]][None, :])[:, 0]
        np.minimum(d2, new_d2, out=d2)
    return points[chosen].copy()


def _reseed_empty(
    centroids: np.ndarray, empty: np.ndarray, points: np.ndarray, weights: np.ndarray
) -> None:
    """Move each zero-mass centroid to the cell with the largest weight * D^2."""
    for i in empty:
        d2 = squared_distances(points, centroids).min(axis=1)
        centroids[i] = points[int(np.argmax(weights * d2))]


def _run_lloyd(
    points: np.ndarray,
    weights: np.ndarray,
    k: int,
    rng: np.random.Generator,
    max_iterations: int,
    tolerance: float,
):
    """One seeded Lloyd run; returns (centroids, assignment, per_cluster, objective, history).

    The history records the weighted objective after each assignment step;
    Lloyd's descent makes it non-increasing.
    """
    n, d = points.shape
    centroids = _kmeanspp_init(points, weights, k, rng)
    history: list[float] = []
    for _ in range(max_iterations):
        d2 = squared_distances(points, centroids)
        assignment = np.argmin(d2, axis=1)
        nearest = d2[np.arange(n), assignment]
        history.append(float((weights * nearest).sum() / k))

        new_centroids = centroids.copy()
        mass = np.bincount(assignment, weights=weights, minlength=k)
        sums = np.zeros((k, d))
        np.add.at(sums, assignment, weights[:, None] * points)
        filled = mass > 0.0
        new_centroids[filled] = sums[filled] / mass[filled, None]
        empty = np.flatnonzero(~filled)
        if empty.size:
            _reseed_empty(new_centroids, empty, points, weights)

        displacement = np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max()
        centroids = new_centroids
        if displacement <= tolerance:
            break

    d2 = squared_distances(points, centroids)
    assignment = np.argmin(d2, axis=1)
    nearest = d2[np.arange(n), assignment]
    per_cluster = np.bincount(assignment, weights=weights * nearest, minlength=k)
    objective = float(per_cluster.sum() / k)
    history.append(objective)
    return centroids, assignment, per_cluster, objective, history


def _best_of_restarts(points, weights, cfg: LloydConfig) -> ClusterModel:
    best = None
    for restart in range(cfg.restarts):
        rng = np.random.default_rng(mix(cfg.seed, restart))
        centroids, assignment, per_cluster, objective, _ = _run_lloyd(
            points, weights, cfg.k, rng, cfg.max_iterations, cfg.tolerance
        )
        if best is None or objective < best[0]:
            best = (objective, centroids, assignment, per_cluster)
    objective, centroids, assignment, per_cluster = best
    return ClusterModel(
        centroids=centroids,
        per_cluster_wcss=per_cluster,
        objective=objective,
        assignment=assignment,
    )


def weighted_lloyd(wps: WeightedPointSet, cfg: LloydConfig) -> ClusterModel:
    """Weighted Lloyd with k-means++ restarts over a noisy grid synopsis.

    Zero-weight cells remain assignable but contribute nothing; a centroid
    whose assigned mass hits zero is re-seeded to the cell with the largest
    weight * D^2.  Returns the restart with the lowest weighted objective
    (ties to the lowest restart index).  Deterministic given the seed.
    """
    if cfg.k > wps.points.shape[0]:
        raise KExceedsDistinctPointsError(
            f"k={cfg.k} exceeds the {wps.points.shape[0]} distinct weighted points"
        )
    weights = wps.effective_weights
    if not (weights > 0.0).any():
        raise AllWeightsNonPositiveError("no cell has positive effective weight")
    return _best_of_restarts(wps.points, weights, cfg)


def nonprivate_kmeans(data: Dataset, cfg: LloydConfig) -> ClusterModel:
    """Plain Lloyd on the raw points (unit weights), same seeding and stopping rules."""
    if cfg.k > data.n:
        raise KExceedsNError(f"k={cfg.k} exceeds the {data.n} data points")
    return _best_of_restarts(data.points, np.ones(data.n), cfg)


def dplloyd_budget_shares(iterations: int, count_fraction: float) -> list[Fraction]:
    """Exact per-query budget shares; 2T entries that sum to exactly 1.

    Shares are kept as rationals so sequential-composition bookkeeping is
    exact: every iteration spends `count_fraction / T` on the count query and
    `(1 - count_fraction) / T` on the coordinate-sum query.
    """
    f = Fraction(count_fraction)
    per_iteration = [f / iterations, (1 - f) / iterations]
    return per_iteration * iterations


def dplloyd(
    data: Dataset, cfg: DpLloydConfig, initial_centroids: np.ndarray | None = None
) -> ClusterModel:
    """Interactive baseline: noisy counts and coordinate sums each iteration.

    The budget is split evenly over T iterations; within an iteration,
    `count_fraction` of the slice goes to the cluster-count query (L1
    sensitivity 1) and the rest to the d coordinate sums (L1 sensitivity
    d * r per cluster under add-remove).  New centroids are noisy sums over
    max(noisy count, 1), clamped into the domain.  The returned model scores
    the final centroids against the raw data.
    """
    if data.bounds != cfg.bounds:
        raise DpGridKmError("dataset bounds do not match the DPLloyd config bounds")
    d, r = cfg.bounds.d, cfg.bounds.r
    eps_t = cfg.total_epsilon / cfg.iterations
    count_scale = 1.0 / (eps_t * cfg.count_fraction)
    sum_scale = d * r / (eps_t * (1.0 - cfg.count_fraction))
    rng = np.random.default_rng(mix(cfg.seed, 0))
    if initial_centroids is None:
        centroids = rng.uniform(-r, r, size=(cfg.k, d))
    else:
        centroids = np.array(initial_centroids, dtype=np.float64)
        if centroids.shape != (cfg.k, d):
            raise DimensionMismatchError(f"initial centroids must be ({cfg.k}, {d})")
    for _ in range(cfg.iterations):
        assignment = np.argmin(squared_distances(data.points, centroids), axis=1)
        counts = np.bincount(assignment, minlength=cfg.k).astype(np.float64)
        sums = np.zeros((cfg.k, d))
        np.add.at(sums, assignment, data.points)
        noisy_counts = counts + laplace_from(rng, count_scale, cfg.k)
        noisy_sums = sums + laplace_from(rng, sum_scale, (cfg.k, d))
        centroids = noisy_sums / np.maximum(noisy_counts, 1.0)[:, None]
        np.clip(centroids, -r, r, out=centroids)
    return evaluate_wcss(data, centroids)
