"""Seeded synthetic datasets: K equal, well-separated Gaussian blobs in [-r, r]^d.

Cluster centers sit on cell centers of a coarse uniform partition, so the
blobs occupy disjoint hypercubes of side about 2r / K^(1/d); the default
spread is a fixed fraction of that side.  Out-of-domain draws are rejected
and resampled rather than clipped, which would pile mass on the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, DomainBounds
from .errors import ConfigError
from .noise import mix

# Blob spread as a fraction of the per-cluster hypercube side.
_STD_FRACTION = 0.08
# Generation refuses configurations where blobs could overlap.
_MIN_SEPARATION_STDS = 6.0


@dataclass(frozen=True)
class SynthConfig:
    n: int
    d: int
    k: int
    r: float = 1.0
    cluster_std: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.n < self.k:
            raise ConfigError(f"need n >= k >= 1, got n={self.n}, k={self.k}")
        if self.d < 1 or self.r <= 0:
            raise ConfigError(f"need d >= 1 and r > 0, got d={self.d}, r={self.r}")
        if self.cluster_std is not None and self.cluster_std <= 0:
            raise ConfigError("cluster_std must be positive when given")

    @property
    def resolved_std(self) -> float:
        if self.cluster_std is not None:
            return self.cluster_std
        return _STD_FRACTION * (2.0 * self.r / self.k ** (1.0 / self.d))


def _per_axis_cells(k: int, d: int) -> int:
    """Smallest g with g**d >= k, computed in exact integer arithmetic."""
    g = max(1, round(k ** (1.0 / d)))
    while g**d < k:
        g += 1
    while g > 1 and (g - 1) ** d >= k:
        g -= 1
    return g


def _cluster_centers(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    g = _per_axis_cells(cfg.k, cfg.d)
    width = 2.0 * cfg.r / g
    axis = -cfg.r + (np.arange(g) + 0.5) * width
    mesh = np.meshgrid(*([axis] * cfg.d), indexing="ij")
    all_centers = np.stack([a.ravel() for a in mesh], axis=-1)
    centers = all_centers[: cfg.k]
    return centers[rng.permutation(cfg.k)]


def _sample_blob(
    center: np.ndarray, count: int, std: float, r: float, rng: np.random.Generator
) -> np.ndarray:
    """Isotropic Gaussian draws around `center`, resampled until inside [-r, r]^d."""
    out = np.empty((count, center.size))
    filled = 0
    while filled < count:
        batch = rng.normal(center, std, size=(count - filled, center.size))
        keep = batch[(np.abs(batch) <= r).all(axis=1)]
        out[filled : filled + keep.shape[0]] = keep
        filled += keep.shape[0]
    return out


def generate(cfg: SynthConfig) -> tuple[Dataset, np.ndarray]:
    """Generate the dataset and return it with the ground-truth centers.

    Centers are the first K cells (row-major) of a ceil(K^(1/d))-per-axis
    partition, deterministically shuffled by seed.  Each cluster gets
    floor(N/K) points, the remainder spread over the first clusters in
    shuffled order.  Refuses configurations whose nearest centers are closer
    than 6 standard deviations: the sizing analysis assumes well-separated
    clusters.
    """
    std = cfg.resolved_std
    shuffle_rng = np.random.default_rng(mix(cfg.seed, 0))
    centers = _cluster_centers(cfg, shuffle_rng)
    if cfg.k > 1:
        diffs = centers[:, None, :] - centers[None, :, :]
        dist = np.sqrt((diffs**2).sum(axis=-1))
        np.fill_diagonal(dist, np.inf)
        min_sep = dist.min()
        if min_sep < _MIN_SEPARATION_STDS * std:
            raise ConfigError(
                f"cluster_std {std:g} too large: nearest centers are {min_sep:g} apart, "
                f"below {_MIN_SEPARATION_STDS} standard deviations"
            )
    base, remainder = divmod(cfg.n, cfg.k)
    sizes = [base + (1 if i < remainder else 0) for i in range(cfg.k)]
    blobs = [
        _sample_blob(centers[i], sizes[i], std, cfg.r, np.random.default_rng(mix(cfg.seed, 1, i)))
        for i in range(cfg.k)
    ]
    points = np.concatenate(blobs, axis=0)
    data = Dataset(points=points, bounds=DomainBounds(r=cfg.r, d=cfg.d))
    centers.setflags(write=False)
    return data, centers
