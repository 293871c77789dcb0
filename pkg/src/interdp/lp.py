"""Exact LP feasibility: is a 2-round mechanism a post-processing of RR_(eps, delta)?

Unknowns are the cumulative laws Pr[T(c, q) = (a0, a1)] of an interactive
post-processor T fed with c in {0, 1, Iam0, Iam1}. Constraints:

* mixture rows: RR-weighted combinations of T reproduce m on both inputs;
* normalization rows: for each c and each of the 4 deterministic
  adversaries q1 = f(a0), T's transcript law sums to 1;
* consistency rows: T's first answer does not depend on the later query.

The system is solved by Phase-1 simplex over exact rationals (gmpy2.mpq)
with Bland's rule. Infeasible systems come with a Farkas certificate y such
that y^T A >= 0 and y^T b < 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from gmpy2 import mpq

from .errors import InvariantViolation
from .mechanism import IAM0, IAM1, FiniteMechanism
from .prob import as_prob, format_rational

SYMBOLS = ("0", "1", IAM0, IAM1)
BITS = ("0", "1")


@dataclass
class LpSystem:
    """Equality system rows . x = rhs with x >= 0 implicit."""

    variables: list[str]
    rows: list[list[Fraction]]
    rhs: list[Fraction]
    kinds: list[str]

    @property
    def family_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for k in self.kinds:
            out[k] = out.get(k, 0) + 1
        return out

    def dump(self) -> str:
        """Plain-text rows ``coeff*var + ... = rhs`` with rational coefficients."""
        lines = []
        for row, b in zip(self.rows, self.rhs):
            terms = [f"{format_rational(c)}*{v}" for c, v in zip(row, self.variables) if c != 0]
            lines.append(" + ".join(terms or ["0"]) + f" = {format_rational(b)}")
        return "\n".join(lines) + "\n"

    def residuals(self, x: list[Fraction]) -> list[Fraction]:
        return [sum((c * xi for c, xi in zip(row, x)), Fraction(0)) - b for row, b in zip(self.rows, self.rhs)]


def variable_name(c: str, q: str, a0: str, a1: str) -> str:
    return f"T[{c},{q},{a0},{a1}]"


def _two_round_laws(m: FiniteMechanism) -> dict:
    """Cumulative law Pr[m(b, q) = (a0, a1)] keyed by (b, q, a0, a1)."""
    if m.rounds != 2:
        raise InvariantViolation("LP builder needs a 2-round mechanism")
    first = m.queries(())
    if len(first) != 1:
        raise InvariantViolation("first round must have a single (dummy) query")
    q0 = first[0]
    if set(m.answers((), q0)) != set(BITS):
        raise InvariantViolation("first-round answers must be the bits 0/1")
    laws = {}
    for a0 in BITS:
        h = ((q0, a0),)
        if set(m.queries(h)) != set(BITS):
            raise InvariantViolation("second-round queries must be the bits 0/1")
        for q in BITS:
            if set(m.answers(h, q)) != set(BITS):
                raise InvariantViolation("second-round answers must be the bits 0/1")
            for b in (0, 1):
                d0 = m.response(b, (), q0).as_dict()
                d1 = m.response(b, h, q).as_dict()
                for a1 in BITS:
                    laws[(b, q, a0, a1)] = d0[a0] * d1[a1]
    return laws


def build_system(m: FiniteMechanism, scale, delta) -> LpSystem:
    u = Fraction(scale)
    if u < 1:
        raise InvariantViolation(f"scale must be >= 1, got {u}")
    delta = as_prob(delta)
    laws = _two_round_laws(m)
    keys = [(c, q, a0, a1) for c in SYMBOLS for q in BITS for a0 in BITS for a1 in BITS]
    index = {k: i for i, k in enumerate(keys)}
    n = len(keys)
    keep, flip = (1 - delta) * u / (1 + u), (1 - delta) / (1 + u)
    weights = (
        {"0": keep, "1": flip, IAM0: delta, IAM1: Fraction(0)},
        {"0": flip, "1": keep, IAM0: Fraction(0), IAM1: delta},
    )
    rows, rhs, kinds = [], [], []

    for b, q, a0, a1 in product((0, 1), BITS, BITS, BITS):
        row = [Fraction(0)] * n
        for c in SYMBOLS:
            row[index[(c, q, a0, a1)]] = weights[b][c]
        rows.append(row)
        rhs.append(laws[(b, q, a0, a1)])
        kinds.append("mixture")

    for c in SYMBOLS:
        for f0, f1 in product(BITS, BITS):
            policy = {"0": f0, "1": f1}
            row = [Fraction(0)] * n
            for a0, a1 in product(BITS, BITS):
                row[index[(c, policy[a0], a0, a1)]] = Fraction(1)
            rows.append(row)
            rhs.append(Fraction(1))
            kinds.append("normalization")

    for c in SYMBOLS:
        for a0 in BITS:
            row = [Fraction(0)] * n
            for a1 in BITS:
                row[index[(c, "0", a0, a1)]] += 1
                row[index[(c, "1", a0, a1)]] -= 1
            rows.append(row)
            rhs.append(Fraction(0))
            kinds.append("consistency")

    return LpSystem([variable_name(*k) for k in keys], rows, rhs, kinds)


@dataclass
class Feasibility:
    status: str
    witness: dict | None = None
    certificate: list | None = None
    rank: int = 0
    pivots: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"

    def to_json(self) -> dict:
        out = {"status": self.status, "rank": self.rank, "pivots": self.pivots}
        if self.witness is not None:
            out["witness"] = {k: format_rational(v) for k, v in self.witness.items()}
        if self.certificate is not None:
            out["certificate"] = [format_rational(y) for y in self.certificate]
        return out


def _to_fraction(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


def independent_rows(sys: LpSystem):
    """Exact Gaussian elimination on the rows of [A | b].

    Returns (kept row indices, None) or, when some combination of rows reads
    0 = nonzero, (kept, y) with y^T A = 0 and y^T b < 0.
    """
    n_rows = len(sys.rows)
    work = [[mpq(c) for c in row] + [mpq(b)] for row, b in zip(sys.rows, sys.rhs)]
    combos = [[mpq(1) if i == j else mpq(0) for j in range(n_rows)] for i in range(n_rows)]
    n = len(sys.variables)
    kept = []
    pivots = []  # (row index, column)
    for i in range(n_rows):
        row, combo = work[i], combos[i]
        for r, col in pivots:
            f = row[col]
            if f:
                prow, pcombo = work[r], combos[r]
                for j in range(n + 1):
                    if prow[j]:
                        row[j] -= f * prow[j]
                for j in range(n_rows):
                    if pcombo[j]:
                        combo[j] -= f * pcombo[j]
        col = next((j for j in range(n) if row[j]), None)
        if col is None:
            if row[n]:
                sign = -1 if row[n] > 0 else 1
                return kept, [_to_fraction(sign * y) for y in combo]
            continue
        piv = row[col]
        for j in range(n + 1):
            row[j] /= piv
        for j in range(n_rows):
            combo[j] /= piv
        pivots.append((i, col))
        kept.append(i)
    return kept, None


def solve_feasibility(sys: LpSystem, max_pivots: int = 100_000) -> Feasibility:
    """Phase-1 simplex with Bland's rule in exact rational arithmetic."""
    kept, certificate = independent_rows(sys)
    rank = len(kept)
    if certificate is not None:
        return Feasibility("infeasible", certificate=certificate, rank=rank)

    n = len(sys.variables)
    m = len(kept)
    signs = []
    tab = []
    for i in kept:
        s = -1 if sys.rhs[i] < 0 else 1
        signs.append(s)
        row = [mpq(s * c) for c in sys.rows[i]] + [mpq(0)] * m + [mpq(s * sys.rhs[i])]
        row[n + len(tab)] = mpq(1)
        tab.append(row)
    width = n + m
    # reduced costs of the phase-1 objective (sum of artificials)
    cost = [mpq(0)] * (width + 1)
    for row in tab:
        for j in range(n):
            cost[j] -= row[j]
        cost[width] -= row[width]
    basis = list(range(n, n + m))

    pivots = 0
    while True:
        enter = next((j for j in range(width) if cost[j] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for i, row in enumerate(tab):
            a = row[enter]
            if a > 0:
                ratio = row[width] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:
            raise RuntimeError("phase-1 objective is bounded below; unbounded ray is impossible")
        prow = tab[leave]
        piv = prow[enter]
        nz = [j for j in range(width + 1) if prow[j]]
        for j in nz:
            prow[j] /= piv
        for row in (*tab, cost):
            if row is prow:
                continue
            f = row[enter]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
        basis[leave] = enter
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("pivot limit reached")

    objective = -cost[width]
    if objective == 0:
        x = [Fraction(0)] * n
        for i, j in enumerate(basis):
            if j < n:
                x[j] = _to_fraction(tab[i][width])
        witness = dict(zip(sys.variables, x))
        return Feasibility("feasible", witness=witness, rank=rank, pivots=pivots)

    # duals of the phase-1 problem: reduced cost of artificial i is 1 - y_i
    y = [1 - cost[n + i] for i in range(m)]
    cert = [Fraction(0)] * len(sys.rows)
    for i, row_idx in enumerate(kept):
        cert[row_idx] = -_to_fraction(y[i]) * signs[i]
    return Feasibility("infeasible", certificate=cert, rank=rank, pivots=pivots)


def check_witness(sys: LpSystem, witness: dict) -> bool:
    x = [Fraction(witness[v]) for v in sys.variables]
    return all(xi >= 0 for xi in x) and all(r == 0 for r in sys.residuals(x))


def check_certificate(sys: LpSystem, y: list) -> bool:
    """Farkas: y^T A >= 0 componentwise and y^T b < 0 proves Ax = b, x >= 0 infeasible."""
    n = len(sys.variables)
    for j in range(n):
        if sum((yi * row[j] for yi, row in zip(y, sys.rows)), Fraction(0)) < 0:
            return False
    return sum((yi * b for yi, b in zip(y, sys.rhs)), Fraction(0)) < 0


def rr_passthrough_witness(m: FiniteMechanism) -> dict:
    """Planted solution when m's first round is RR_(u, delta) with a constant second answer.

    T(0) and T(1) repeat their bit, T(Iam0) and T(Iam1) answer 0 and 1; the
    second answer is whatever constant m emits. Used by tests as a known-good point.
    """
    laws = _two_round_laws(m)
    second = {}
    for a0 in BITS:
        for q in BITS:
            ones = [a1 for a1 in BITS if laws[(0, q, a0, a1)] + laws[(1, q, a0, a1)] > 0]
            second[(q, a0)] = ones[0] if ones else "0"
    first = {"0": "0", "1": "1", IAM0: "0", IAM1: "1"}
    out = {}
    for c, q, a0, a1 in product(SYMBOLS, BITS, BITS, BITS):
        hit = a0 == first[c] and a1 == second[(q, a0)]
        out[variable_name(c, q, a0, a1)] = Fraction(int(hit))
    return out


__all__ = [
    "LpSystem",
    "Feasibility",
    "build_system",
    "solve_feasibility",
    "independent_rows",
    "check_witness",
    "check_certificate",
    "variable_name",
    "rr_passthrough_witness",
]
