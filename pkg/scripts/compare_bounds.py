#!/usr/bin/env python3
"""Basic vs optimal composition curves, one CSV per delta_g."""

import argparse

from interdp.experiments import run_bound_comparison


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=0.005)
    ap.add_argument("--k-max", type=int, default=1000)
    ap.add_argument("--delta-g", type=float, nargs="+", default=[1e-3, 1e-5, 1e-7])
    ap.add_argument("--prefix", default="curves")
    args = ap.parse_args()

    for dg in args.delta_g:
        path = f"{args.prefix}_dg{dg:g}.csv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(run_bound_comparison(args.eps, args.k_max, dg))
        print(path)


if __name__ == "__main__":
    main()
