"""Experiment harness: seeded sweeps over (method, N, d, K, epsilon) and tables.

Within one (cell, trial) every method consumes the identical dataset, derived
from `mix(base_seed, cell, trial)`; per-method noise and initialization use
further derived streams.  Reruns with the same config therefore reproduce the
emitted CSVs byte for byte (timings live only in results.json).
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .cluster import (
    DpLloydConfig,
    LloydConfig,
    WeightedPointSet,
    dplloyd,
    dplloyd_budget_shares,
    nonprivate_kmeans,
    weighted_lloyd,
)
from .core import Dataset, PrivacyBudget, evaluate_wcss
from .errors import ConfigError, KExceedsDistinctPointsError
from .grid import build_grid, histogram, privatize
from .noise import float_bits, mix
from .sizing import GridChoice, eugkm, make_params, solve_rugnik, threshold_strings
from .synth import SynthConfig, generate

METHODS = ("rugnik", "eugkm", "dplloyd", "noprivacy")
GRID_METHODS = ("rugnik", "eugkm")


@dataclass(frozen=True)
class ExperimentConfig:
    methods: tuple[str, ...]
    ns: tuple[int, ...]
    ds: tuple[int, ...]
    ks: tuple[int, ...]
    epsilons: tuple[float, ...]
    trials: int = 50
    base_seed: int = 0
    r: float = 1.0
    cluster_std: float | None = None
    out_dir: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "ns", tuple(int(v) for v in self.ns))
        object.__setattr__(self, "ds", tuple(int(v) for v in self.ds))
        object.__setattr__(self, "ks", tuple(int(v) for v in self.ks))
        object.__setattr__(self, "epsilons", tuple(float(v) for v in self.epsilons))
        if not self.methods:
            raise ConfigError("methods must not be empty")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}; choose from {METHODS}")
        for name, values in (
            ("ns", self.ns), ("ds", self.ds), ("ks", self.ks), ("epsilons", self.epsilons)
        ):
            if not values:
                raise ConfigError(f"{name} must not be empty")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")


@dataclass(frozen=True)
class ExperimentResult:
    """Aggregated outcome of one (method, N, d, K, epsilon) cell."""

    method: str
    n: int
    d: int
    k: int
    epsilon: float
    m: int | None
    total_cells: int | None
    degenerate: bool
    trials: int
    mean_wcss: float
    std_wcss: float
    epsilon_spent: float
    wall_time_s: float


def trial_seed(base_seed: int, n: int, d: int, k: int, epsilon: float, trial: int) -> int:
    """Seed shared by all methods of one (cell, trial); keyed by values, not list order."""
    return mix(base_seed, n, d, k, float_bits(epsilon), trial)


def trial_dataset(
    cfg: ExperimentConfig, n: int, d: int, k: int, epsilon: float, trial: int
) -> tuple[Dataset, np.ndarray]:
    """The dataset every method sees in this (cell, trial)."""
    seed = mix(trial_seed(cfg.base_seed, n, d, k, epsilon, trial), 0)
    return generate(SynthConfig(n=n, d=d, k=k, r=cfg.r, cluster_std=cfg.cluster_std, seed=seed))


def grid_choice_for(method: str, n: int, d: int, k: int, epsilon: float) -> GridChoice:
    if method == "rugnik":
        return solve_rugnik(make_params(n, d, k, epsilon))
    if method == "eugkm":
        return eugkm(n, d, epsilon)
    raise ConfigError(f"{method} is not a grid method")


def grid_pipeline_centroids(
    data: Dataset, choice: GridChoice, k: int, epsilon: float, noise_seed: int, lloyd_seed: int
) -> tuple[np.ndarray, float]:
    """Histogram -> privatize (full budget, one shot) -> weighted Lloyd.

    A degenerate grid (fewer cells than clusters) is still run: the best
    achievable clustering with K' = M centers is computed and its centroid
    list padded with duplicates up to K, mirroring how degenerate cells are
    reported rather than skipped.
    """
    grid = build_grid(data.bounds, choice.m)
    hist = privatize(histogram(data, grid), PrivacyBudget(epsilon), noise_seed)
    wps = WeightedPointSet(points=grid.centers, weights=hist.noisy_counts)
    try:
        model = weighted_lloyd(wps, LloydConfig(k=k, seed=lloyd_seed))
        centroids = model.centroids
    except KExceedsDistinctPointsError:
        sub = weighted_lloyd(wps, LloydConfig(k=choice.total_cells, seed=lloyd_seed))
        centroids = sub.centroids[np.arange(k) % choice.total_cells]
    return centroids, hist.epsilon_spent


_METHOD_STREAM = {name: i for i, name in enumerate(METHODS)}


def _method_centroids(
    method: str, data: Dataset, k: int, epsilon: float, base: int
) -> tuple[np.ndarray, float]:
    """Run one method on one dataset; return (centroids, epsilon spent)."""
    stream = _METHOD_STREAM[method]
    noise_seed = mix(base, 1, stream)
    lloyd_seed = mix(base, 2, stream)
    if method in GRID_METHODS:
        choice = grid_choice_for(method, data.n, data.bounds.d, k, epsilon)
        return grid_pipeline_centroids(data, choice, k, epsilon, noise_seed, lloyd_seed)
    if method == "dplloyd":
        dp_cfg = DpLloydConfig(k=k, total_epsilon=epsilon, bounds=data.bounds, seed=noise_seed)
        model = dplloyd(data, dp_cfg)
        assert sum(dplloyd_budget_shares(dp_cfg.iterations, dp_cfg.count_fraction)) == 1
        return model.centroids, epsilon
    model = nonprivate_kmeans(data, LloydConfig(k=k, seed=lloyd_seed))
    return model.centroids, 0.0


def run(cfg: ExperimentConfig) -> list[ExperimentResult]:
    """Execute the full sweep; one result per (method, N, d, K, epsilon) cell.

    Trials are the inner loop so all methods of a trial share one dataset.
    """
    active = [m for m in METHODS if m in cfg.methods]
    results = []
    for n in cfg.ns:
        for d in cfg.ds:
            for k in cfg.ks:
                for epsilon in cfg.epsilons:
                    wcss = {m: np.empty(cfg.trials) for m in active}
                    elapsed = dict.fromkeys(active, 0.0)
                    spent = dict.fromkeys(active, 0.0)
                    for trial in range(cfg.trials):
                        base = trial_seed(cfg.base_seed, n, d, k, epsilon, trial)
                        data, _ = trial_dataset(cfg, n, d, k, epsilon, trial)
                        for method in active:
                            start = time.perf_counter()
                            centroids, spent[method] = _method_centroids(
                                method, data, k, epsilon, base
                            )
                            wcss[method][trial] = evaluate_wcss(data, centroids).objective
                            elapsed[method] += time.perf_counter() - start
                    for method in active:
                        if method in GRID_METHODS:
                            choice = grid_choice_for(method, n, d, k, epsilon)
                            m, cells = choice.m, choice.total_cells
                            degenerate = choice.degenerate_for(k)
                        else:
                            m, cells, degenerate = None, None, False
                        results.append(
                            ExperimentResult(
                                method=method,
                                n=n,
                                d=d,
                                k=k,
                                epsilon=epsilon,
                                m=m,
                                total_cells=cells,
                                degenerate=degenerate,
                                trials=cfg.trials,
                                mean_wcss=float(wcss[method].mean()),
                                std_wcss=float(wcss[method].std(ddof=1))
                                if cfg.trials > 1
                                else 0.0,
                                epsilon_spent=spent[method],
                                wall_time_s=elapsed[method],
                            )
                        )
    return results


def save_results(results: list[ExperimentResult], path) -> Path:
    path = Path(path)
    payload = {"results": [asdict(r) for r in results]}
    path.write_text(json.dumps(payload, indent=1) + "\n")
    return path


def load_results(path) -> list[ExperimentResult]:
    payload = json.loads(Path(path).read_text())
    return [ExperimentResult(**record) for record in payload["results"]]


def _eps_label(epsilon: float) -> str:
    return f"{epsilon:g}"


def _write_table(path: Path, header: list[str], rows: list[list], fmt: str) -> Path:
    if fmt == "csv":
        with open(path.with_suffix(".csv"), "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        return path.with_suffix(".csv")
    if fmt == "json":
        records = [dict(zip(header, row)) for row in rows]
        out = path.with_suffix(".json")
        out.write_text(json.dumps(records, indent=1) + "\n")
        return out
    raise ConfigError(f"unknown table format {fmt!r}; use 'csv' or 'json'")


def _method_sort_key(result: ExperimentResult):
    return (result.k, result.n, result.d, _METHOD_STREAM[result.method])


def emit_tables(results: list[ExperimentResult], out_dir, fmt: str = "csv") -> list[Path]:
    """Write the WCSS table, the grid-count table, and the threshold table.

    Rows are (K, N, d, method) and columns are the privacy budgets; the
    threshold table lists the 3-decimal budget range per (K, N, d).  Output
    is deterministic for deterministic results.
    """
    if not results:
        raise ConfigError("no results to emit")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    epsilons = sorted({r.epsilon for r in results})
    eps_cols = [_eps_label(e) for e in epsilons]
    by_cell = {(r.method, r.n, r.d, r.k, r.epsilon): r for r in results}
    row_keys = sorted(
        {(r.method, r.n, r.d, r.k) for r in results},
        key=lambda t: (t[3], t[1], t[2], _METHOD_STREAM[t[0]]),
    )

    written = []
    wcss_rows = []
    for method, n, d, k in row_keys:
        row = [k, n, d, method]
        for eps in epsilons:
            cell = by_cell.get((method, n, d, k, eps))
            row.append(f"{cell.mean_wcss:.6f}" if cell else "")
        wcss_rows.append(row)
    written.append(
        _write_table(out_dir / "wcss_table", ["k", "n", "d", "method"] + eps_cols, wcss_rows, fmt)
    )

    grid_rows = []
    for method, n, d, k in row_keys:
        if method not in GRID_METHODS:
            continue
        row = [k, n, d, method]
        for eps in epsilons:
            cell = by_cell.get((method, n, d, k, eps))
            if cell is None:
                row.append("")
            else:
                row.append(f"{cell.total_cells}*" if cell.degenerate else f"{cell.total_cells}")
        grid_rows.append(row)
    written.append(
        _write_table(out_dir / "grids_table", ["k", "n", "d", "method"] + eps_cols, grid_rows, fmt)
    )

    threshold_rows = []
    for k, n, d in sorted({(r.k, r.n, r.d) for r in results if r.d >= 2}):
        low, high = threshold_strings(make_params(n, d, k, 1.0))
        threshold_rows.append([k, n, d, low, high])
    written.append(
        _write_table(
            out_dir / "thresholds_table", ["k", "n", "d", "eps_low", "eps_high"], threshold_rows, fmt
        )
    )
    written.append(save_results(results, out_dir / "results.json"))
    return written


def emit_sizing_tables(
    ns, ds, ks, epsilons, out_dir, fmt: str = "csv"
) -> list[Path]:
    """Grid-count and threshold tables straight from the selection rules.

    No Monte Carlo involved; useful to regenerate the deterministic tables
    without rerunning a benchmark.
    """
    ns, ds, ks = [tuple(v) for v in (ns, ds, ks)]
    epsilons = tuple(float(e) for e in epsilons)
    if not (ns and ds and ks and epsilons):
        raise ConfigError("ns, ds, ks and epsilons must all be non-empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    eps_cols = [_eps_label(e) for e in sorted(epsilons)]

    grid_rows = []
    threshold_rows = []
    for k in sorted(set(ks)):
        for n in sorted(set(ns)):
            for d in sorted(set(ds)):
                for method in GRID_METHODS:
                    row = [k, n, d, method]
                    for eps in sorted(epsilons):
                        choice = grid_choice_for(method, n, d, k, eps)
                        star = "*" if choice.degenerate_for(k) else ""
                        row.append(f"{choice.total_cells}{star}")
                    grid_rows.append(row)
                low, high = threshold_strings(make_params(n, d, k, 1.0))
                threshold_rows.append([k, n, d, low, high])
    return [
        _write_table(out_dir / "grids_table", ["k", "n", "d", "method"] + eps_cols, grid_rows, fmt),
        _write_table(
            out_dir / "thresholds_table", ["k", "n", "d", "eps_low", "eps_high"], threshold_rows, fmt
        ),
    ]
