"""Command line entry point: ``ncesprit run|crb|predict``."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from ..errors import ModelError, NcEspritError, NumericalError
from .montecarlo import run_monte_carlo
from .output import FORMATS, emit, to_csv
from .scenario import FULL_TRIALS, PRESETS, load_scenario, preset

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ncesprit", description="NC ESPRIT Monte-Carlo experiments")
    sub = ap.add_subparsers(dest="cmd", required=True)
    for cmd, helptext in (("run", "Monte-Carlo RMSE with analytic curve and bounds"),
                          ("crb", "deterministic bounds only"),
                          ("predict", "analytic first-order RMSE only")):
        p = sub.add_parser(cmd, help=helptext)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--preset", choices=PRESETS)
        src.add_argument("--config", help="scenario JSON file")
        p.add_argument("--trials", type=int, help="trials per sweep point")
        p.add_argument("--full-scale", action="store_true",
                       help=f"use {FULL_TRIALS} trials per sweep point")
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out", help="output directory (CSV goes to stdout if omitted)")
        p.add_argument("--format", default="csv", help="comma separated subset of csv,svg")
    return ap


def _require_defined(table) -> None:
    # crb / predict have no estimator to fall back on: a quantity that failed
    # in every trial of a point is a hard numerical failure
    for r in table.rows:
        if r.trials == 0 and r.failures > 0:
            where = f" at {table.sweep_axis}={r.sweep_value}" if table.sweep_axis else ""
            raise NumericalError(f"{r.estimator} undefined{where}")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        sc = preset(args.preset) if args.preset else load_scenario(args.config)
        trials = FULL_TRIALS if args.full_scale else args.trials
        if trials is not None:
            sc = replace(sc, trials=trials)
        if args.seed is not None:
            sc = replace(sc, seed=args.seed)
        formats = tuple(f.strip() for f in args.format.split(",") if f.strip())
        bad = [f for f in formats if f not in FORMATS]
        if bad:
            raise ModelError(f"unknown format(s): {', '.join(bad)}")
        if args.workers < 1:
            raise ModelError("workers must be >= 1")
        sc.validate()
        table = run_monte_carlo(sc, workers=args.workers,
                                estimate=args.cmd == "run",
                                analytic=args.cmd in ("run", "predict"),
                                bounds=args.cmd in ("run", "crb"))
        if args.cmd != "run":
            _require_defined(table)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NcEspritError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        for path in emit(table, args.out, formats):
            print(path)
    else:
        sys.stdout.write(to_csv(table))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
