"""Command-line interface: gen | size | cluster | bench | tables.

Exit codes: 0 success, 1 usage error, 2 runtime error.  Benchmark options can
also come from a JSON config file via --config; explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import bench
from .cluster import DpLloydConfig, LloydConfig, dplloyd, nonprivate_kmeans
from .core import DomainBounds, evaluate_wcss, load_dataset
from .errors import ConfigError, DpGridKmError
from .sizing import make_params, theorem_bounds
from .synth import SynthConfig, generate

USAGE_ERROR = 1
RUNTIME_ERROR = 2


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; we reserve 2 for runtime."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok]


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok]


def _method_list(text: str) -> list[str]:
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def _build_parser() -> _Parser:
    parser = _Parser(prog="dpgridkm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", parents=[], help="write a synthetic CSV dataset plus sidecar")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--k", type=int, required=True)
    gen.add_argument("--r", type=float, default=1.0)
    gen.add_argument("--cluster-std", type=float, default=None)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out-dir", default=".")

    size = sub.add_parser("size", help="grid resolutions and bounds for parameter sweeps")
    size.add_argument("--n", type=_int_list, required=True)
    size.add_argument("--d", type=_int_list, required=True)
    size.add_argument("--k", type=_int_list, required=True)
    size.add_argument("--epsilon", type=_float_list, required=True)
    size.add_argument("--out-dir", default=None, help="write CSV here instead of stdout")

    cluster = sub.add_parser("cluster", help="cluster one CSV dataset with one method")
    cluster.add_argument("--data", required=True, help="CSV file with d numeric columns")
    cluster.add_argument("--r", type=float, required=True)
    cluster.add_argument("--d", type=int, required=True)
    cluster.add_argument("--k", type=int, required=True)
    cluster.add_argument("--method", choices=bench.METHODS, required=True)
    cluster.add_argument("--epsilon", type=float, default=None)
    cluster.add_argument("--seed", type=int, default=0)
    cluster.add_argument("--clip", action="store_true", help="clamp out-of-range rows")

    bench_cmd = sub.add_parser("bench", help="run the benchmark sweep and emit tables")
    bench_cmd.add_argument("--config", default=None, help="JSON file with the options below")
    bench_cmd.add_argument("--method", type=_method_list, default=None,
                           help="comma list from: " + ",".join(bench.METHODS))
    bench_cmd.add_argument("--n", type=_int_list, default=None)
    bench_cmd.add_argument("--d", type=_int_list, default=None)
    bench_cmd.add_argument("--k", type=_int_list, default=None)
    bench_cmd.add_argument("--epsilon", type=_float_list, default=None)
    bench_cmd.add_argument("--trials", type=int, default=None)
    bench_cmd.add_argument("--seed", type=int, default=None)
    bench_cmd.add_argument("--r", type=float, default=None)
    bench_cmd.add_argument("--cluster-std", type=float, default=None)
    bench_cmd.add_argument("--out-dir", default=None)
    bench_cmd.add_argument("--format", choices=("csv", "json"), default=None)

    tables = sub.add_parser("tables", help="emit tables from saved results or from the rules")
    tables.add_argument("--results", default=None, help="results.json from a previous bench run")
    tables.add_argument("--n", type=_int_list, default=None)
    tables.add_argument("--d", type=_int_list, default=None)
    tables.add_argument("--k", type=_int_list, default=None)
    tables.add_argument("--epsilon", type=_float_list, default=None)
    tables.add_argument("--out-dir", default=".")
    tables.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def _cmd_gen(args) -> int:
    cfg = SynthConfig(n=args.n, d=args.d, k=args.k, r=args.r,
                      cluster_std=args.cluster_std, seed=args.seed)
    data, centers = generate(cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "dataset.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{j}" for j in range(cfg.d)])
        writer.writerows([repr(float(v)) for v in row] for row in data.points)
    sidecar = {
        "config": {"n": cfg.n, "d": cfg.d, "k": cfg.k, "r": cfg.r,
                   "cluster_std": cfg.resolved_std, "seed": cfg.seed},
        "true_centroids": centers.tolist(),
    }
    (out_dir / "dataset.json").write_text(json.dumps(sidecar, indent=1) + "\n")
    print(f"wrote {csv_path} ({data.n} rows) and {out_dir / 'dataset.json'}")
    return 0


def _cmd_size(args) -> int:
    header = ["n", "d", "k", "epsilon", "method", "m_continuous", "m", "cells",
              "m_lower", "m_upper"]
    rows = []
    for n in args.n:
        for d in args.d:
            for k in args.k:
                for eps in args.epsilon:
                    params = make_params(n, d, k, eps)
                    lower, upper = theorem_bounds(params)
                    for method in bench.GRID_METHODS:
                        choice = bench.grid_choice_for(method, n, d, k, eps)
                        rows.append([
                            n, d, k, f"{eps:g}", method,
                            f"{choice.m_continuous:.6f}", choice.m, choice.total_cells,
                            f"{lower:.6f}" if lower is not None else "",
                            f"{upper:.6f}" if upper is not None else "",
                        ])
    if args.out_dir is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    else:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "size_table.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        print(f"wrote {out / 'size_table.csv'}")
    return 0


def _cmd_cluster(args) -> int:
    bounds = DomainBounds(r=args.r, d=args.d)
    data = load_dataset(args.data, bounds, clip=args.clip)
    if args.method != "noprivacy" and args.epsilon is None:
        raise ConfigError(f"--epsilon is required for method {args.method!r}")
    out: dict = {"method": args.method, "k": args.k, "n": data.n, "d": args.d}
    if args.method in bench.GRID_METHODS:
        choice = bench.grid_choice_for(args.method, data.n, args.d, args.k, args.epsilon)
        centroids, _ = bench.grid_pipeline_centroids(
            data, choice, args.k, args.epsilon, args.seed, args.seed + 1
        )
        out.update(m=choice.m, cells=choice.total_cells,
                   degenerate=choice.degenerate_for(args.k), epsilon=args.epsilon)
    elif args.method == "dplloyd":
        model = dplloyd(data, DpLloydConfig(k=args.k, total_epsilon=args.epsilon,
                                            bounds=bounds, seed=args.seed))
        centroids = model.centroids
        out.update(epsilon=args.epsilon)
    else:
        model = nonprivate_kmeans(data, LloydConfig(k=args.k, seed=args.seed))
        centroids = model.centroids
    scored = evaluate_wcss(data, centroids)
    out["centroids"] = np.asarray(centroids).tolist()
    out["objective"] = scored.objective
    print(json.dumps(out, indent=1))
    return 0


_BENCH_KEYS = {
    "method": "methods", "n": "ns", "d": "ds", "k": "ks", "epsilon": "epsilons",
    "trials": "trials", "seed": "base_seed", "r": "r",
    "cluster_std": "cluster_std", "out_dir": "out_dir",
}


def _bench_config(args) -> tuple[bench.ExperimentConfig, str]:
    options: dict = {}
    if args.config is not None:
        options.update(json.loads(Path(args.config).read_text()))
    for flag, key in _BENCH_KEYS.items():
        value = getattr(args, flag)
        if value is not None:
            options[key] = value
    fmt = options.pop("format", None) or args.format or "csv"
    out_dir = options.pop("out_dir", None) or "."
    defaults = {"trials": 50, "base_seed": 0, "r": 1.0, "cluster_std": None}
    for key, value in defaults.items():
        options.setdefault(key, value)
    missing = [key for key in ("methods", "ns", "ds", "ks", "epsilons") if key not in options]
    if missing:
        raise ConfigError(f"bench needs {missing}; pass flags or a --config file")
    cfg = bench.ExperimentConfig(out_dir=out_dir, **options)
    return cfg, fmt


def _cmd_bench(args) -> int:
    cfg, fmt = _bench_config(args)
    results = bench.run(cfg)
    written = bench.emit_tables(results, cfg.out_dir, fmt=fmt)
    print(f"ran {len(results)} cells x {cfg.trials} trials")
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_tables(args) -> int:
    if args.results is not None:
        results = bench.load_results(args.results)
        written = bench.emit_tables(results, args.out_dir, fmt=args.format)
    else:
        needed = {"--n": args.n, "--d": args.d, "--k": args.k, "--epsilon": args.epsilon}
        missing = [flag for flag, value in needed.items() if not value]
        if missing:
            raise ConfigError(f"tables needs --results or all of {sorted(missing)}")
        written = bench.emit_sizing_tables(
            args.n, args.d, args.k, args.epsilon, args.out_dir, fmt=args.format
        )
    for path in written:
        print(f"wrote {path}")
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "size": _cmd_size,
    "cluster": _cmd_cluster,
    "bench": _cmd_bench,
    "tables": _cmd_tables,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (DpGridKmError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"dpgridkm: error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
