"""Uniform partition of [-r, r]^d, exact histograms, and one-shot privatization.

Cells are identified by the row-major flattening of their per-axis indices,
so cell identity is deterministic across runs.  Counts are stored densely:
privatization must noise every cell, including the empty ones.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .core import Dataset, DomainBounds, PrivacyBudget
from .errors import (
    AlreadyPrivatizedError,
    BoundsMismatchError,
    DimensionMismatchError,
    DpGridKmError,
    GridOverflowError,
    OutOfDomainError,
)
from .noise import privatize_counts

# Dense count arrays cap: 2**26 float64 cells is ~0.5 GiB.
MAX_CELLS = 2**26


@dataclass(frozen=True)
class UniformGrid:
    """m^d equal cells over [-r, r]^d."""

    bounds: DomainBounds
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise DpGridKmError(f"cells per axis must be >= 1, got {self.m}")
        if self.m**self.bounds.d > MAX_CELLS:
            raise GridOverflowError(
                f"grid would have {self.m}^{self.bounds.d} cells, "
                f"above the dense-count limit of {MAX_CELLS}"
            )

    @property
    def total_cells(self) -> int:
        return self.m**self.bounds.d

    @property
    def cell_width(self) -> float:
        return 2.0 * self.bounds.r / self.m

    @cached_property
    def centers(self) -> np.ndarray:
        """(M, d) cell centers, row-major over per-axis indices (last axis fastest)."""
        r, d, m = self.bounds.r, self.bounds.d, self.m
        axis = -r + (np.arange(m) + 0.5) * self.cell_width
        mesh = np.meshgrid(*([axis] * d), indexing="ij")
        centers = np.stack([a.ravel() for a in mesh], axis=-1)
        centers.setflags(write=False)
        return centers


def build_grid(bounds: DomainBounds, m: int) -> UniformGrid:
    """Construct the uniform m-per-axis grid over the given domain."""
    return UniformGrid(bounds=bounds, m=m)


def cell_indices(grid: UniformGrid, points) -> np.ndarray:
    """Flat row-major cell index for each point.

    Per-axis index is floor((x + r) / cell_width); the upper boundary x = r
    is closed, i.e. it maps into the last cell, so every in-domain point has
    exactly one cell.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    d = grid.bounds.d
    if pts.shape[1] != d:
        raise DimensionMismatchError(f"points must have dimension {d}, got {pts.shape[1]}")
    if not grid.bounds.contains(pts).all():
        raise OutOfDomainError("point outside the grid domain")
    per_axis = np.floor((pts + grid.bounds.r) / grid.cell_width).astype(np.int64)
    np.clip(per_axis, 0, grid.m - 1, out=per_axis)
    return np.ravel_multi_index(tuple(per_axis.T), (grid.m,) * d)


def cell_index(grid: UniformGrid, x) -> int:
    """Flat cell index of a single point."""
    return int(cell_indices(grid, np.asarray(x, dtype=np.float64).reshape(1, -1))[0])


@dataclass(frozen=True, eq=False)
class GridHistogram:
    """Per-cell counts over a grid; noisy counts appear only after privatization."""

    grid: UniformGrid
    true_counts: np.ndarray
    noisy_counts: np.ndarray | None = None
    epsilon_spent: float | None = None

    def __post_init__(self):
        counts = np.asarray(self.true_counts, dtype=np.int64)
        if counts.shape != (self.grid.total_cells,):
            raise DpGridKmError("true_counts must have one entry per grid cell")
        if (counts < 0).any():
            raise DpGridKmError("true_counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "true_counts", counts)
        if (self.noisy_counts is None) != (self.epsilon_spent is None):
            raise DpGridKmError("noisy_counts and epsilon_spent must appear together")
        if self.noisy_counts is not None:
            noisy = np.asarray(self.noisy_counts, dtype=np.float64)
            if noisy.shape != counts.shape:
                raise DpGridKmError("noisy_counts must match true_counts in length")
            noisy.setflags(write=False)
            object.__setattr__(self, "noisy_counts", noisy)

    @property
    def total(self) -> int:
        return int(self.true_counts.sum())

    @property
    def is_privatized(self) -> bool:
        return self.noisy_counts is not None


def histogram(data: Dataset, grid: UniformGrid) -> GridHistogram:
    """Exact per-cell counts of the dataset; total mass equals N."""
    if data.bounds != grid.bounds:
        raise BoundsMismatchError(
            f"dataset bounds {data.bounds} do not match grid bounds {grid.bounds}"
        )
    idx = cell_indices(grid, data.points)
    counts = np.bincount(idx, minlength=grid.total_cells)
    return GridHistogram(grid=grid, true_counts=counts)


def privatize(hist: GridHistogram, budget: PrivacyBudget, seed: int) -> GridHistogram:
    """One-shot Laplace privatization of a histogram.

    Returns a new histogram carrying the noisy counts and the budget spent.
    Downstream clustering consumes only (cell centers, noisy counts), so the
    raw dataset never crosses the release boundary.
    """
    if hist.is_privatized:
        raise AlreadyPrivatizedError(
            "histogram already privatized; re-noising would double-spend the budget"
        )
    noisy = privatize_counts(hist.true_counts, budget, seed)
    return replace(hist, noisy_counts=noisy, epsilon_spent=budget.epsilon)


def histogram_to_dict(hist: GridHistogram) -> dict:
    """JSON-ready release form of a histogram.

    Once noisy counts exist, true counts are withheld: the dump is the
    external release format and must not leak the exact histogram.
    """
    out = {"m": hist.grid.m, "d": hist.grid.bounds.d, "r": hist.grid.bounds.r}
    if hist.is_privatized:
        out["noisy_counts"] = [float(v) for v in hist.noisy_counts]
        out["epsilon_spent"] = hist.epsilon_spent
    else:
        out["true_counts"] = [int(v) for v in hist.true_counts]
    return out


def histogram_from_dict(payload: dict) -> GridHistogram:
    """Rebuild a histogram from its dump; noisy-only dumps get zero true counts."""
    grid = build_grid(DomainBounds(r=payload["r"], d=payload["d"]), payload["m"])
    true_counts = payload.get("true_counts")
    if true_counts is None:
        true_counts = np.zeros(grid.total_cells, dtype=np.int64)
    return GridHistogram(
        grid=grid,
        true_counts=true_counts,
        noisy_counts=payload.get("noisy_counts"),
        epsilon_spent=payload.get("epsilon_spent"),
    )
