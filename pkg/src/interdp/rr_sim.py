"""Simulating a pure-DP interactive mechanism from one bit of randomized response.

Given m that is (eps, 0)-DP on the fixed input pair, the simulator T is an
interactive mechanism taking c in {0, 1}. Its cumulative transcript laws are

    T_c(transcript) = (u * P_c(transcript) - P_{1-c}(transcript)) / (u - 1)

where P_b is m's cumulative law on input b and u = e^eps. Feeding T the
output of RR_u(b) reproduces m(x_b) against every adversary.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .adversary import enumerate_adversaries, priv_loss, view_dist
from .bounds import rr_product_laws
from .composition import concomp
from .errors import InvariantViolation, NotDPError
from .mechanism import DEFAULT_LIMITS, FiniteMechanism, Limits, TableMechanism, history_key
from .prob import FiniteDist, format_rational, least_scale

SIM_LABELS = ("rr0", "rr1")


class SimulatorTree(TableMechanism):
    """Branch tables T(0, .) and T(1, .) plus their cumulative laws."""

    def __init__(self, rounds, branches, query_alphabet, answer_alphabet, scale, cumulative):
        super().__init__(rounds, branches, query_alphabet, answer_alphabet, SIM_LABELS)
        self.scale = Fraction(scale)
        self.cumulative = cumulative


def _input_independent(m: FiniteMechanism) -> bool:
    return all(m.response(0, h, q).as_dict() == m.response(1, h, q).as_dict() for h, q in m.nodes())


def build_simulator(m: FiniteMechanism, scale) -> SimulatorTree:
    """Construct T at scale u.

    Nonnegativity of every cumulative entry is equivalent to m being
    (ln u, 0)-DP on the pair, so the DP precondition is checked while building;
    a violation raises ``NotDPError`` naming the offending transcript.
    Conditionals below zero-probability prefixes are set to uniform.
    """
    u = Fraction(scale)
    if u < 1:
        raise InvariantViolation(f"scale must be >= 1, got {u}")
    qa, aa = m.alphabets()
    if u == 1:
        if not _input_independent(m):
            raise NotDPError("scale 1 requires an input-independent mechanism")
        table = {(h, q): m.response(0, h, q) for h, q in m.nodes()}
        cum = {(): Fraction(1)}
        return SimulatorTree(m.rounds, (table, dict(table)), qa, aa, u, (cum, dict(cum)))

    tables = ({}, {})
    cums = ({(): Fraction(1)}, {(): Fraction(1)})
    m_cum = {(): (Fraction(1), Fraction(1))}
    frontier = deque([()])
    while frontier:
        h = frontier.popleft()
        if len(h) >= m.rounds:
            continue
        p0h, p1h = m_cum[h]
        for q in m.queries(h):
            d0, d1 = m.response(0, h, q).as_dict(), m.response(1, h, q).as_dict()
            kids = {}
            for a in d0:
                child = h + ((q, a),)
                p0, p1 = p0h * d0[a], p1h * d1[a]
                m_cum[child] = (p0, p1)
                t0 = (u * p0 - p1) / (u - 1)
                t1 = (u * p1 - p0) / (u - 1)
                if t0 < 0 or t1 < 0:
                    raise NotDPError(
                        f"not (ln {u}, 0)-DP: transcript {history_key(child, '')[:-1]!r} "
                        f"has probabilities {p0} vs {p1}",
                        transcript=child,
                    )
                cums[0][child], cums[1][child] = t0, t1
                kids[a] = (t0, t1)
                frontier.append(child)
            for c in (0, 1):
                parent = cums[c][h]
                if parent > 0:
                    cond = {a: kids[a][c] / parent for a in d0}
                else:
                    cond = {a: Fraction(1, len(d0)) for a in d0}
                tables[c][(h, q)] = FiniteDist.from_dict(cond)
    return SimulatorTree(m.rounds, tables, qa, aa, u, cums)


def rr_weights(scale) -> tuple[Fraction, Fraction]:
    """(Pr[RR(b) = b], Pr[RR(b) = 1 - b]) for pure randomized response."""
    u = Fraction(scale)
    return u / (1 + u), 1 / (1 + u)


def induced_mechanism(t: TableMechanism, scale) -> TableMechanism:
    """The interactive mechanism T(RR_u(b)) written as branch tables on inputs x0, x1."""
    keep, flip = rr_weights(scale)
    tables = ({}, {})
    cum = {(): (Fraction(1), Fraction(1))}
    frontier = deque([()])
    while frontier:
        h = frontier.popleft()
        if len(h) >= t.rounds:
            continue
        t0h, t1h = cum[h]
        for q in t.queries(h):
            e0, e1 = t.response(0, h, q).as_dict(), t.response(1, h, q).as_dict()
            for a in e0:
                cum[h + ((q, a),)] = (t0h * e0[a], t1h * e1[a])
                frontier.append(h + ((q, a),))
            for b in (0, 1):
                wb, wo = (keep, flip) if b == 0 else (flip, keep)
                parent = wb * t0h + wo * t1h
                if parent > 0:
                    cond = {a: (wb * t0h * e0[a] + wo * t1h * e1[a]) / parent for a in e0}
                else:
                    cond = {a: Fraction(1, len(e0)) for a in e0}
                tables[b][(h, q)] = FiniteDist.from_dict(cond)
    return TableMechanism(t.rounds, tables, t.query_alphabet, t.answer_alphabet)


@dataclass
class VerificationReport:
    status: str
    adversaries_checked: int
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "adversaries_checked": self.adversaries_checked,
            "violations": self.violations,
        }


def verify_simulation(
    m: FiniteMechanism, t: FiniteMechanism, scale, limits: Limits | None = DEFAULT_LIMITS
) -> VerificationReport:
    """Check keep * view(T, b) + flip * view(T, 1-b) == view(m, b) for every strategy."""
    keep, flip = rr_weights(scale)
    advs = enumerate_adversaries(m, limits)
    violations = []
    for adv in advs:
        try:
            vt = (view_dist(t, adv, 0).as_dict(), view_dist(t, adv, 1).as_dict())
        except (InvariantViolation, KeyError) as exc:
            violations.append({"adversary": adv.to_json(), "error": f"simulator incompatible: {exc}"})
            continue
        for b in (0, 1):
            want = view_dist(m, adv, b).as_dict()
            for y in sorted(set(want) | set(vt[b])):
                got = keep * vt[b].get(y, 0) + flip * vt[1 - b].get(y, 0)
                exp = want.get(y, Fraction(0))
                if got != exp:
                    violations.append(
                        {
                            "adversary": adv.to_json(),
                            "input": b,
                            "transcript": list(y),
                            "expected": format_rational(exp),
                            "actual": format_rational(got),
                            "discrepancy": format_rational(got - exp),
                        }
                    )
    return VerificationReport("fail" if violations else "pass", len(advs), violations)


@dataclass
class EquivalenceReport:
    left: Fraction
    right: Fraction
    component_scales: list

    @property
    def sound(self) -> bool:
        return self.left <= self.right

    @property
    def equal(self) -> bool:
        return self.left == self.right

    def to_json(self) -> dict:
        return {
            "concomp_scale": format_rational(self.left),
            "rr_product_scale": format_rational(self.right),
            "concomp_eps": math.log(self.left),
            "rr_product_eps": math.log(self.right),
            "component_scales": [format_rational(s) for s in self.component_scales],
            "sound": self.sound,
            "equal": self.equal,
        }


def rr_product_scale(scales: Sequence, delta_g) -> Fraction:
    """PrivLoss of the noninteractive product of RR_{u_i}, exactly."""
    p, q = rr_product_laws([Fraction(s) for s in scales])
    return Fraction(max(least_scale(p, q, Fraction(delta_g)), least_scale(q, p, Fraction(delta_g))))


def priv_loss_equivalence_check(
    ms: Sequence[FiniteMechanism], delta_g, limits: Limits | None = DEFAULT_LIMITS
) -> EquivalenceReport:
    """Compare PrivLoss(ConComp(ms)) with PrivLoss of composed randomized response.

    Each component is assigned its own pure PrivLoss scale; the left side can
    never exceed the right.
    """
    delta_g = Fraction(delta_g)
    scales = [priv_loss(m, 0, limits) for m in ms]
    left = priv_loss(concomp(ms, limits=limits), delta_g, limits)
    return EquivalenceReport(left, rr_product_scale(scales, delta_g), scales)
