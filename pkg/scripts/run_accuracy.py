#!/usr/bin/env python3
"""Critical-coupling accuracy study over random network families.

For every (model, distribution) pair this sweeps network sizes and coupling
parameters, measures the smallest synchronizing gain by bisection, and
reports its mean ratio to the margin normalizer.  Emits one plot-ready CSV
per (model, distribution) with columns p, n, samples, mean_ratio.

Usage:
    python scripts/run_accuracy.py [--samples 20] [--seed 0] [--prefix accuracy]
"""

from __future__ import annotations

import argparse

from syncgrid.experiments import accuracy_experiment, write_rows_csv

MODELS = {
    "erg": (0.2, 0.4, 0.8),
    "smn": (0.1, 0.3, 0.5),
    "rgg": (0.4, 0.6, 0.8),
}
SIZES = (10, 20)
DISTS = ("bipolar", "uniform")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--prefix", default="accuracy")
    parser.add_argument("--models", default="erg,smn")
    args = parser.parse_args()

    for model in args.models.split(","):
        for dist in DISTS:
            rows = []
            for n in SIZES:
                for p in MODELS[model]:
                    result = accuracy_experiment(n, model, p, dist,
                                                 args.samples, seed=args.seed)
                    rows.append([p, n, args.seed, len(result.ratios),
                                 result.mean_ratio])
                    print(f"{model}/{dist} n={n} p={p}: "
                          f"mean ratio {result.mean_ratio:.3f}")
            out = f"{args.prefix}_{model}_{dist}.csv"
            write_rows_csv(["p", "n", "seed", "samples", "mean_ratio"], rows, out)
            print(f"wrote {out}")


if __name__ == "__main__":
    main()
