#!/usr/bin/env python3
"""Convergence-rate study: W1 distance to the circular law across ensembles.

Runs the seeded experiment sweep for each requested ensemble, fits the
log-log slope of the replica-mean W1 against n, and prints a comparison
table.  Eigenvalue ensembles are expected near n^(-1/2); independent
sampling (iid-disk) near sqrt(log n / n), i.e. a visibly flatter slope.

Results accumulate in OUT_DIR/records.jsonl, so repeated invocations only
compute missing rows.
"""

import argparse
import json
import math
import os
import sys

from circlaw.harness.config import ExperimentConfig
from circlaw.harness.ratefit import fit_rate
from circlaw.harness.runner import run_experiment, summary_csv


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--ensembles", default="ginibre,iid-disk",
                        help="comma-separated ensemble tags")
    parser.add_argument("--sizes", default="16,32,64,128,256",
                        help="comma-separated matrix sizes")
    parser.add_argument("--replicas", type=int, default=20)
    parser.add_argument("--resolution", type=int, default=1024)
    parser.add_argument("--seed", type=int, default=20260817)
    parser.add_argument("--out-dir", default="results/rate_study")
    args = parser.parse_args(argv)

    sizes = tuple(int(t) for t in args.sizes.split(","))
    fits = {}
    all_records = []
    for ensemble in args.ensembles.split(","):
        ensemble = ensemble.strip()
        config = ExperimentConfig(
            ensemble=ensemble, sizes=sizes, replicas=args.replicas,
            master_seed=args.seed, metrics=("w1_sd",),
            resolution=args.resolution, out_dir=args.out_dir)
        records = run_experiment(config)
        all_records.extend(records)
        fits[ensemble] = fit_rate(records, "w1_sd")

    summary_csv(all_records, os.path.join(args.out_dir, "summary.csv"))
    with open(os.path.join(args.out_dir, "rate_fits.json"), "w",
              encoding="utf-8") as fh:
        json.dump({ens: {"slope": fit.slope, "intercept": fit.intercept,
                         "r_squared": fit.r_squared,
                         "std_errors": list(fit.std_errors)}
                   for ens, fit in fits.items()}, fh, indent=2, sort_keys=True)

    width = max(len("ensemble"), *(len(e) for e in fits))
    print(f"{'ensemble':<{width}}  slope     r^2      n^slope model")
    for ensemble, fit in sorted(fits.items()):
        print(f"{ensemble:<{width}}  {fit.slope:+.4f}  {fit.r_squared:.5f}  "
              f"W1 ~ {math.exp(fit.intercept):.3f} * n^{fit.slope:.3f}")
    print(f"rows in {args.out_dir}/records.jsonl; "
          f"summary.csv and rate_fits.json written")
    return 0


if __name__ == "__main__":
    sys.exit(main())
