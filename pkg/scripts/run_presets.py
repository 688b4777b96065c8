#!/usr/bin/env python3
"""Run every figure preset and write CSV + SVG into an output directory.

    python3 scripts/run_presets.py --out results --trials 500 --workers 4
    python3 scripts/run_presets.py --out results --full-scale
"""
import argparse
import time
from dataclasses import replace

from ncesprit.harness import emit, preset, run_monte_carlo
from ncesprit.harness.scenario import FULL_TRIALS, PRESETS


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--full-scale", action="store_true")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--only", nargs="*", choices=PRESETS)
    args = ap.parse_args()
    trials = FULL_TRIALS if args.full_scale else args.trials
    for name in args.only or PRESETS:
        sc = replace(preset(name), trials=trials, seed=args.seed)
        t0 = time.perf_counter()
        table = run_monte_carlo(sc, workers=args.workers)
        paths = emit(table, args.out, ("csv", "svg"))
        print(f"{name}: {time.perf_counter() - t0:.1f} s -> {', '.join(map(str, paths))}")


if __name__ == "__main__":
    main()
