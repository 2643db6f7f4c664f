"""Command line entry point: ``coset-qrc run|table|trajectory``."""

from __future__ import annotations

import argparse
import sys

from .benchmarks import MapSpec, generate_trajectory
from .harness import ConfigError, ExperimentConfig, _csv_text, format_table, read_table, run_experiment


def _run(args: argparse.Namespace) -> int:
    try:
        cfg = ExperimentConfig.load(args.config)
        if args.output_dir:
            cfg.output_dir = args.output_dir
        results = run_experiment(cfg, workers=args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rows = [
        {"training_length": str(r.training_length), "method": r.method, "E_F": repr(r.error),
         "below_one": "true" if r.error < 1 else "false"}
        for r in results
    ]
    print(format_table(rows))
    print(f"wrote results to {cfg.output_dir}")
    return 0


def _table(args: argparse.Namespace) -> int:
    try:
        rows = read_table(args.results)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(format_table(rows))
    return 0


def _trajectory(args: argparse.Namespace) -> int:
    params = {}
    if args.map == "logistic" and args.r is not None:
        params["r"] = args.r
    if args.map == "henon":
        params.update({k: v for k, v in (("a", args.a), ("b", args.b)) if v is not None})
    xs = generate_trajectory(MapSpec(args.map, **params), args.length)
    sys.stdout.write(_csv_text(["t", "x"], [[i, float(x)] for i, x in enumerate(xs)]))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coset-qrc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment grid from a JSON config")
    run.add_argument("--config", required=True)
    run.add_argument("--output-dir", help="override output_dir from the config")
    run.add_argument("--workers", type=int, help="parallel cells (default: $COSET_QRC_THREADS or all cores)")
    run.set_defaults(func=_run)

    table = sub.add_parser("table", help="print errors.csv of a result directory as a grid")
    table.add_argument("--results", required=True)
    table.set_defaults(func=_table)

    traj = sub.add_parser("trajectory", help="dump a benchmark trajectory as CSV")
    traj.add_argument("--map", choices=("logistic", "henon"), default="logistic")
    traj.add_argument("--length", type=int, required=True)
    traj.add_argument("--r", type=float)
    traj.add_argument("--a", type=float)
    traj.add_argument("--b", type=float)
    traj.set_defaults(func=_trajectory)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)
