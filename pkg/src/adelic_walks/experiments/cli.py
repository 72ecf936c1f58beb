"""Command line entry point.

One subcommand per experiment; every subcommand reads an optional config
file and accepts overrides for the seed, worker count, and output
directory.  Results land in ``<out>/results.csv`` and
``<out>/summary.json``; the exit code is 0 exactly when every pass/fail
row passed.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from adelic_walks.experiments.config import ConfigError, ExperimentConfig, parse_config
from adelic_walks.experiments.results import emit_results
from adelic_walks.experiments.runners import RUNNERS

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adelic-walks",
        description="Monte Carlo verification experiments for p-adic and adelic random walks.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in RUNNERS:
        cmd = sub.add_parser(name, help=f"run the {name} experiment")
        cmd.add_argument("--config", type=Path, default=None, help="config file (key = value lines)")
        cmd.add_argument("--seed", type=int, default=None, help="override the RNG seed")
        cmd.add_argument("--workers", type=int, default=None, help="override the worker count")
        cmd.add_argument("--out", type=Path, default=None, help="override the output directory")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None:
        config = parse_config(Path(args.config).read_text(encoding="utf-8"))
    else:
        config = ExperimentConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.out is not None:
        overrides["out_dir"] = str(args.out)
    if overrides:
        config = replace(config, **overrides)
    return config


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
        table = RUNNERS[args.experiment](config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    paths = emit_results(table, config.out_dir)
    for row in table.rows:
        if not row.passed:
            print(f"FAIL {row.params}: empirical={row.empirical} vs {row.analytic} ({row.provenance})")
    print(
        f"{args.experiment}: {table.passes}/{len(table.rows)} rows passed, "
        f"seed={table.seed}, wall={table.wall_time_s:.1f}s -> {paths[0]}"
    )
    return 0 if table.all_passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
