"""Closed-form bounds for concurrent composition.

Three families:

* basic pure composition: epsilons add;
* the hybrid bound for approximate DP, with the delta term minimized over
  the order in which mechanisms are swapped;
* the optimal composition formula, solved for the least eps_g.

The optimal formula's left side is the hockey-stick divergence between the
product laws of randomized response on inputs 0 and 1, so it is piecewise
linear in u_g = e^{eps_g} and is solved exactly by ``prob.least_scale``.
Functions whose names end in ``_scales`` take scales u_i = e^{eps_i} and work
in any ordered field; pass Fractions to get exact answers.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .errors import InvariantViolation, NoSolutionError
from .prob import least_scale

MAX_SUBSET_K = 20

BASIC_PURE = "basic-pure"
HYBRID = "hybrid"
OPTIMAL_PURE = "optimal-pure"
OPTIMAL_APPROX = "optimal-approx-noninteractive"


@dataclass(frozen=True)
class BoundResult:
    eps_g: float
    delta_g: float
    theorem: str
    permutation: tuple | None = None
    # hybrid only: the k * e^{sum eps} * max(delta) convenience bound
    delta_upper: float | None = None
    noninteractive_only: bool = False
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"eps_g": self.eps_g, "delta_g": self.delta_g, "theorem": self.theorem}
        if self.permutation is not None:
            out["permutation"] = list(self.permutation)
        if self.delta_upper is not None:
            out["delta_upper"] = self.delta_upper
        if self.noninteractive_only:
            out["noninteractive_only"] = True
        out.update(self.extra)
        return out


def _check_eps(eps_list):
    eps_list = list(eps_list)
    if not eps_list:
        raise InvariantViolation("need at least one mechanism")
    if any(e < 0 for e in eps_list):
        raise InvariantViolation("epsilons must be nonnegative")
    return eps_list


def basic_pure(eps_list: Sequence[float]) -> BoundResult:
    eps_list = _check_eps(eps_list)
    return BoundResult(sum(eps_list), 0, BASIC_PURE)


# -- hybrid bound ---------------------------------------------------------


def hybrid_sum(scales, deltas, order) -> object:
    """delta_{s0} + sum_i (prod_{j<i} u_{sj}) * delta_{si} for one ordering."""
    total, prefix = 0, 1
    for i in order:
        total += prefix * deltas[i]
        prefix *= scales[i]
    return total


def _swap_first(i, j, scales, deltas):
    # i before j is no worse iff delta_i (u_j - 1) >= delta_j (u_i - 1);
    # cross-multiplied so u = 1 needs no special case
    lhs = deltas[i] * (scales[j] - 1)
    rhs = deltas[j] * (scales[i] - 1)
    return -1 if lhs > rhs else (1 if lhs < rhs else 0)


def hybrid_order(scales, deltas) -> list[int]:
    """Ordering minimizing the hybrid delta term (exchange argument)."""
    cmp = functools.partial(_swap_first, scales=scales, deltas=deltas)
    return sorted(range(len(scales)), key=functools.cmp_to_key(cmp))


def hybrid_delta_scales(scales, deltas) -> tuple[object, list[int]]:
    order = hybrid_order(scales, deltas)
    return hybrid_sum(scales, deltas, order), order


def hybrid_delta(eps_list: Sequence[float], delta_list: Sequence[float]) -> BoundResult:
    eps_list = _check_eps(eps_list)
    if len(delta_list) != len(eps_list):
        raise InvariantViolation("need one delta per epsilon")
    if any(not 0 <= d <= 1 for d in delta_list):
        raise InvariantViolation("deltas must lie in [0, 1]")
    scales = [math.exp(e) for e in eps_list]
    value, order = hybrid_delta_scales(scales, list(delta_list))
    total = sum(eps_list)
    upper = len(eps_list) * math.exp(total) * max(delta_list)
    return BoundResult(total, value, HYBRID, tuple(order), delta_upper=upper)


def hybrid_delta_homogeneous(eps: float, delta: float, k: int) -> float:
    """delta * sum_{i<k} e^{i eps}, the hybrid term for k identical mechanisms."""
    if delta == 0:
        return 0.0
    if eps == 0:
        return k * delta
    return delta * math.expm1(k * eps) / math.expm1(eps)


# -- optimal composition ---------------------------------------------------


def rr_product_laws(scales):
    """Product laws of RR over all subsets S (S = positions answering 'truth')."""
    p, q = [1], [1]
    for u in scales:
        z = 1 + u
        p = [x * u / z for x in p] + [x / z for x in p]
        q = [x / z for x in q] + [x * u / z for x in q]
    return p, q


def optimal_lhs_subsets(scales, ug):
    """(1/prod(1+u_i)) * sum_S max(prod_S u - u_g * prod_{not S} u, 0)."""
    if len(scales) > MAX_SUBSET_K:
        raise InvariantViolation(f"subset enumeration limited to k <= {MAX_SUBSET_K}")
    p, q = rr_product_laws(scales)
    total = 0
    for a, b in zip(p, q):
        d = a - ug * b
        if d > 0:
            total += d
    return total


def _binomial_laws(scale, k):
    z = (1 + scale) ** k
    p = [math.comb(k, i) * scale**i / z for i in range(k + 1)]
    q = [math.comb(k, i) * scale ** (k - i) / z for i in range(k + 1)]
    return p, q


def optimal_lhs_binomial(scale, k: int, ug):
    """Homogeneous special case: sum_i C(k,i) max(u^i - u_g u^{k-i}, 0) / (1+u)^k."""
    p, q = _binomial_laws(scale, k)
    total = 0
    for a, b in zip(p, q):
        d = a - ug * b
        if d > 0:
            total += d
    return total


def least_scale_subsets(scales, rhs):
    """Least u_g >= 1 with optimal_lhs_subsets(scales, u_g) <= rhs."""
    if rhs < 0:
        raise NoSolutionError(f"target {rhs} is negative; no eps_g satisfies the bound")
    if len(scales) > MAX_SUBSET_K:
        raise InvariantViolation(f"subset enumeration limited to k <= {MAX_SUBSET_K}")
    return least_scale(*rr_product_laws(scales), rhs)


def least_scale_binomial(scale, k: int, rhs):
    if rhs < 0:
        raise NoSolutionError(f"target {rhs} is negative; no eps_g satisfies the bound")
    return least_scale(*_binomial_laws(scale, k), rhs)


def _least_log_scale_sorted(log_p, log_q, rhs) -> float:
    """Float solve in log space; rows must be sorted by decreasing log-ratio.

    Returns ln(u_g) for the least u_g >= 1 with sum max(p - u_g q, 0) <= rhs.
    """
    log_r = log_p - log_q
    keep = log_r > 0
    log_p, log_q, log_r = log_p[keep], log_q[keep], log_r[keep]
    if log_r.size == 0:
        return 0.0
    p, q = np.exp(log_p), np.exp(log_q)
    cum_p = np.concatenate(([0.0], np.cumsum(p)))
    cum_q = np.concatenate(([0.0], np.cumsum(q)))
    # f at breakpoint j (before adding row j) is cum_p[j] - r_j cum_q[j]
    f_at = cum_p[:-1] - np.exp(log_r) * cum_q[:-1]
    over = np.nonzero(f_at > rhs)[0]
    if over.size:
        j = over[0]
        return math.log((cum_p[j] - rhs) / cum_q[j])
    if cum_p[-1] - cum_q[-1] <= rhs:
        return 0.0
    return math.log((cum_p[-1] - rhs) / cum_q[-1])


def _log_binomial_laws(eps: float, k: int):
    i = np.arange(k, -1, -1, dtype=float)  # decreasing ratio u^{2i-k}
    log_c = gammaln(k + 1) - gammaln(i + 1) - gammaln(k - i + 1)
    log_z = k * np.logaddexp(0.0, eps)
    return log_c + i * eps - log_z, log_c + (k - i) * eps - log_z


def _log_rr_product_laws(eps_list):
    sums = np.zeros(1)
    for e in eps_list:
        sums = np.concatenate((sums, sums + e))
    total = float(sum(eps_list))
    log_z = float(sum(np.logaddexp(0.0, e) for e in eps_list))
    order = np.argsort(-(2 * sums - total), kind="stable")
    sums = sums[order]
    return sums - log_z, (total - sums) - log_z


def optimal_eps_homogeneous(eps: float, k: int, rhs: float) -> float:
    """Least eps_g for k identical eps-DP mechanisms; exact piecewise solve in floats."""
    if rhs < 0:
        raise NoSolutionError(f"target {rhs} is negative; no eps_g satisfies the bound")
    if rhs == 0:
        return k * eps
    return _least_log_scale_sorted(*_log_binomial_laws(eps, k), rhs)


def homogeneous_lhs(eps: float, k: int, eps_g: float) -> float:
    log_p, log_q = _log_binomial_laws(eps, k)
    return float(np.sum(np.maximum(np.exp(log_p) - np.exp(eps_g + log_q), 0.0)))


def optimal_eps_homogeneous_bisect(eps: float, k: int, rhs: float, tol: float = 1e-9) -> float:
    """Bisection on eps_g; cross-check for the piecewise solve at large k."""
    if rhs < 0:
        raise NoSolutionError(f"target {rhs} is negative; no eps_g satisfies the bound")
    lo, hi = 0.0, k * eps
    if homogeneous_lhs(eps, k, lo) <= rhs:
        return 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if homogeneous_lhs(eps, k, mid) <= rhs:
            hi = mid
        else:
            lo = mid
    return hi


def _optimal_eps(eps_list, rhs) -> float:
    if rhs < 0:
        raise NoSolutionError(f"target {rhs} is negative; no eps_g satisfies the bound")
    if rhs == 0:
        return float(sum(eps_list))
    if all(e == eps_list[0] for e in eps_list):
        return optimal_eps_homogeneous(eps_list[0], len(eps_list), rhs)
    if len(eps_list) > MAX_SUBSET_K:
        raise InvariantViolation(
            f"heterogeneous optimal bound limited to k <= {MAX_SUBSET_K}; got k={len(eps_list)}"
        )
    return _least_log_scale_sorted(*_log_rr_product_laws(eps_list), rhs)


def optimal_eps_pure(eps_list: Sequence[float], delta_g: float) -> BoundResult:
    """Least eps_g for concurrent composition of (eps_i, 0)-DP interactive mechanisms."""
    eps_list = _check_eps(eps_list)
    if not 0 <= delta_g < 1:
        raise InvariantViolation("delta_g must lie in [0, 1)")
    return BoundResult(_optimal_eps(eps_list, delta_g), delta_g, OPTIMAL_PURE)


def approx_rhs(delta_list, delta_g):
    """1 - (1 - delta_g) / prod(1 - delta_i)."""
    if not any(delta_list):
        return delta_g
    prod = 1
    for d in delta_list:
        prod *= 1 - d
    return 1 - (1 - delta_g) / prod


def optimal_eps_approx_noninteractive(
    eps_list: Sequence[float], delta_list: Sequence[float], delta_g: float
) -> BoundResult:
    """Optimal bound with delta_i > 0. Proven for noninteractive mechanisms only."""
    eps_list = _check_eps(eps_list)
    if len(delta_list) != len(eps_list):
        raise InvariantViolation("need one delta per epsilon")
    if any(not 0 <= d < 1 for d in delta_list):
        raise InvariantViolation("deltas must lie in [0, 1)")
    if not 0 <= delta_g < 1:
        raise InvariantViolation("delta_g must lie in [0, 1)")
    rhs = approx_rhs(delta_list, delta_g)
    if rhs < 0:
        raise NoSolutionError(
            f"delta_g={delta_g} is below 1 - prod(1 - delta_i); no eps_g satisfies the bound"
        )
    return BoundResult(
        _optimal_eps(eps_list, rhs), delta_g, OPTIMAL_APPROX, noninteractive_only=any(delta_list)
    )


# -- curves ----------------------------------------------------------------

CURVE_COLUMNS = ("k", "eps_basic", "delta_hybrid", "eps_optimal", "delta_g")


def compare_curves(eps: float, k_max: int, delta_g: float, delta: float = 0.0) -> list[dict]:
    """Per-k comparison of the group-privacy style bound and the optimal bound.

    Each row composes k mechanisms that are all (eps, delta)-DP.
    """
    if eps < 0 or k_max < 1:
        raise InvariantViolation("need eps >= 0 and k_max >= 1")
    rows = []
    for k in range(1, k_max + 1):
        if delta == 0:
            opt = optimal_eps_homogeneous(eps, k, delta_g)
        else:
            opt = optimal_eps_approx_noninteractive([eps] * k, [delta] * k, delta_g).eps_g
        rows.append(
            {
                "k": k,
                "eps_basic": k * eps,
                "delta_hybrid": hybrid_delta_homogeneous(eps, delta, k),
                "eps_optimal": opt,
                "delta_g": delta_g,
            }
        )
    return rows


def curves_to_csv(rows: list[dict]) -> str:
    lines = [",".join(CURVE_COLUMNS)]
    for r in rows:
        cells = [str(r["k"])] + [f"{r[c]:.12g}" for c in CURVE_COLUMNS[1:]]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
