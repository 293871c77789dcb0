#!/usr/bin/env python3
"""Sampled RR post-processing study: writes per-trial CSV and prints the summary."""

import argparse
import json
from fractions import Fraction

from interdp.experiments import DEFAULT_TRIALS, FULL_TRIALS, half_step, run_rr_feasibility, trials_to_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    ap.add_argument("--full", action="store_true", help=f"run {FULL_TRIALS} trials")
    ap.add_argument("--delta", default="1/20")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--control", action="store_true", help="solve at (1+u)/2")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--csv", default="rr_feasibility.csv")
    args = ap.parse_args()

    trials = FULL_TRIALS if args.full else args.trials
    records, summary = run_rr_feasibility(
        trials, Fraction(args.delta), args.seed, half_step if args.control else None, args.workers
    )
    with open(args.csv, "w", encoding="utf-8") as fh:
        fh.write(trials_to_csv(records))
    print(json.dumps(summary.to_json(), indent=2))


if __name__ == "__main__":
    main()
