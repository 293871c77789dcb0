"""Seeded harnesses: RR-simulability feasibility study and bound curves."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .adversary import priv_loss
from .bounds import compare_curves, curves_to_csv
from .errors import InvariantViolation, UnboundedEpsilonError
from .lp import build_system, check_certificate, check_witness, solve_feasibility
from .mechanism import TwoRoundParams, two_round
from .prob import as_prob, format_rational

DYADIC_BITS = 16
DEFAULT_TRIALS = 2000
FULL_TRIALS = 10_000
DEFAULT_DELTA = Fraction(1, 20)

TRIAL_COLUMNS = ("index", *TwoRoundParams.NAMES, "delta", "u", "eps", "lp_status", "runtime_ms")


def sample_mechanism(seed: int, index: int) -> TwoRoundParams:
    """Ten independent dyadic values j / 2^16, j uniform on {0, ..., 2^16}.

    The stream for trial ``index`` depends only on (seed, index).
    """
    rng = np.random.default_rng([seed, index])
    den = 1 << DYADIC_BITS
    js = rng.integers(0, den, size=10, endpoint=True)
    return TwoRoundParams.from_tuple(Fraction(int(j), den) for j in js)


@dataclass
class TrialRecord:
    index: int
    params: TwoRoundParams
    delta: Fraction
    eps_scale: Fraction | None
    lp_status: str  # feasible | infeasible | unbounded_eps | error
    runtime_ms: float | None = None
    verified: bool = False
    detail: str = ""

    def row(self, timing: bool = False) -> list[str]:
        u = self.eps_scale
        return [
            str(self.index),
            *(format_rational(x) for x in self.params.as_tuple()),
            format_rational(self.delta),
            format_rational(u) if u is not None else "",
            f"{math.log(u):.12g}" if u is not None else "",
            self.lp_status,
            f"{self.runtime_ms:.3f}" if timing and self.runtime_ms is not None else "",
        ]


def _run_trial(args) -> TrialRecord:
    seed, index, delta, scale_fn = args
    params = sample_mechanism(seed, index)
    t0 = time.perf_counter()
    m = two_round(params)
    try:
        u = priv_loss(m, delta)
    except UnboundedEpsilonError as exc:
        return TrialRecord(index, params, delta, None, "unbounded_eps", detail=str(exc))
    target = scale_fn(u) if scale_fn is not None else u
    sys = build_system(m, target, delta)
    res = solve_feasibility(sys)
    if res.feasible:
        ok = check_witness(sys, res.witness)
    else:
        ok = check_certificate(sys, res.certificate)
    ms = (time.perf_counter() - t0) * 1000
    status = res.status if ok else "error"
    return TrialRecord(index, params, delta, u, status, ms, ok, "" if ok else "exact re-check failed")


def half_step(u: Fraction) -> Fraction:
    """Scale (1 + u) / 2, strictly below u whenever u > 1."""
    return (1 + u) / 2


@dataclass
class FeasibilitySummary:
    trials: int
    feasible: int
    infeasible: int
    unbounded_eps: int
    errors: int
    delta: Fraction
    seed: int

    @property
    def feasible_fraction(self) -> float | None:
        n = self.feasible + self.infeasible
        return self.feasible / n if n else None

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "feasible": self.feasible,
            "infeasible": self.infeasible,
            "unbounded_eps": self.unbounded_eps,
            "delta": format_rational(self.delta),
            "seed": self.seed,
        }


def run_rr_feasibility(
    trials: int = DEFAULT_TRIALS,
    delta=DEFAULT_DELTA,
    seed: int = 1,
    scale_fn: Callable[[Fraction], Fraction] | None = None,
    workers: int = 1,
) -> tuple[list[TrialRecord], FeasibilitySummary]:
    """Sample 2-round mechanisms, compute PrivLoss at delta, and ask whether
    RR at that (u, delta) can be post-processed into them.

    ``scale_fn`` replaces the LP scale (e.g. ``half_step`` for the control run).
    """
    if trials < 0:
        raise InvariantViolation("trials must be >= 0")
    delta = as_prob(delta)
    jobs = [(seed, i, delta, scale_fn) for i in range(trials)]
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_trial, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        records = [_run_trial(j) for j in jobs]
    records.sort(key=lambda r: r.index)
    count = lambda s: sum(r.lp_status == s for r in records)  # noqa: E731
    summary = FeasibilitySummary(
        trials, count("feasible"), count("infeasible"), count("unbounded_eps"), count("error"), delta, seed
    )
    return records, summary


def trials_to_csv(records: list[TrialRecord], timing: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRIAL_COLUMNS)
    for r in records:
        w.writerow(r.row(timing))
    return buf.getvalue()


def check_dominance(rows: list[dict]) -> None:
    for r in rows:
        if r["eps_optimal"] > r["eps_basic"] * (1 + 1e-12):
            raise AssertionError(f"optimal bound exceeds basic bound at k={r['k']}")


def run_bound_comparison(eps: float, k_max: int, delta_g: float, delta: float = 0.0) -> str:
    """compare_curves as CSV, after asserting the optimal curve never exceeds the basic one."""
    rows = compare_curves(eps, k_max, delta_g, delta)
    check_dominance(rows)
    return curves_to_csv(rows)


__all__ = [
    "sample_mechanism",
    "TrialRecord",
    "FeasibilitySummary",
    "run_rr_feasibility",
    "trials_to_csv",
    "half_step",
    "run_bound_comparison",
    "check_dominance",
    "TRIAL_COLUMNS",
    "DEFAULT_TRIALS",
    "FULL_TRIALS",
    "DEFAULT_DELTA",
]
