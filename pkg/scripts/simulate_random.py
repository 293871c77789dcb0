#!/usr/bin/env python3
"""Build and verify the RR simulator for seeded random pure-DP 2-round mechanisms."""

import argparse

from interdp.adversary import priv_loss
from interdp.errors import UnboundedEpsilonError
from interdp.experiments import sample_mechanism
from interdp.mechanism import two_round
from interdp.rr_sim import build_simulator, verify_simulation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args()

    done = failed = i = 0
    while done < args.count:
        m = two_round(sample_mechanism(args.seed, i))
        i += 1
        try:
            u = priv_loss(m, 0)
        except UnboundedEpsilonError:
            continue
        report = verify_simulation(m, build_simulator(m, u), u)
        done += 1
        failed += not report.passed
    print(f"{done} mechanisms, {failed} failed, {i - done} skipped (unbounded)")


if __name__ == "__main__":
    main()
