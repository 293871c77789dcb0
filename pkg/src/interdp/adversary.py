"""Deterministic adversaries, exact view laws, and true privacy loss.

Randomized adversaries are mixtures of deterministic ones, so the worst case
over deterministic strategies is the worst case overall. Views therefore
carry only the answer transcript.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping

from .errors import InvariantViolation
from .mechanism import DEFAULT_LIMITS, FiniteMechanism, History, Limits
from .prob import FiniteDist, as_prob, least_scale

__all__ = [
    "AdversaryStrategy",
    "enumerate_adversaries",
    "count_adversaries",
    "count_by_product",
    "view_dist",
    "view_pair",
    "priv_loss",
    "worst_adversary",
    "worst_adversary_enumerated",
    "best_response",
]


@dataclass(frozen=True)
class AdversaryStrategy:
    """Maps each answer history (tuple of answers) to the next query."""

    policy: Mapping[tuple, str]
    depth: int

    def query(self, answers: tuple) -> str:
        try:
            return self.policy[answers]
        except KeyError:
            raise InvariantViolation(f"strategy undefined after answers {answers!r}") from None

    def history(self, answers: tuple) -> History:
        """The (query, answer) history this strategy produces for ``answers``."""
        return tuple((self.query(answers[:i]), a) for i, a in enumerate(answers))

    def to_json(self) -> dict:
        return {",".join(ah): q for ah, q in sorted(self.policy.items(), key=lambda kv: (len(kv[0]), kv[0]))}

    @classmethod
    def from_json(cls, doc: Mapping[str, str], depth: int) -> "AdversaryStrategy":
        return cls({tuple(k.split(",")) if k else (): q for k, q in doc.items()}, depth)


def _policies(m: FiniteMechanism, h: History, ah: tuple) -> list[dict]:
    if len(h) >= m.rounds:
        return [{}]
    out = []
    for q in m.queries(h):
        children = [_policies(m, h + ((q, a),), ah + (a,)) for a in m.answers(h, q)]
        for combo in product(*children):
            pol = {ah: q}
            for c in combo:
                pol.update(c)
            out.append(pol)
    return out


def enumerate_adversaries(m: FiniteMechanism, limits: Limits | None = DEFAULT_LIMITS) -> list[AdversaryStrategy]:
    """Every deterministic full-depth strategy against ``m``, without duplicates."""
    if limits is not None:
        m.check_limits(limits)
    return [AdversaryStrategy(p, m.rounds) for p in _policies(m, (), ())]


def count_adversaries(m: FiniteMechanism, h: History = ()) -> int:
    """Recursive strategy count: sum over queries of the product over answers."""
    if len(h) >= m.rounds:
        return 1
    return sum(
        math.prod(count_adversaries(m, h + ((q, a),)) for a in m.answers(h, q))
        for q in m.queries(h)
    )


def count_by_product(m: FiniteMechanism) -> int:
    """Product over answer histories of the round's query alphabet size.

    Valid when the available queries depend only on the round, not on earlier
    queries (true for every table mechanism built from per-round alphabets).
    """
    qa, aa = m.alphabets()
    total, n_hist = 1, 1
    for i in range(m.rounds):
        total *= len(qa[i]) ** n_hist
        n_hist *= len(aa[i])
    return total


def view_dist(m: FiniteMechanism, adv: AdversaryStrategy, b: int) -> FiniteDist:
    """Exact law of the answer transcript when ``adv`` talks to ``m`` on input b."""
    out: dict = {}

    def walk(h, ah, prob):
        if len(h) >= m.rounds:
            out[ah] = prob
            return
        q = adv.query(ah)
        if q not in m.queries(h):
            raise InvariantViolation(f"query {q!r} not available after answers {ah!r}")
        for a, p in m.response(b, h, q).items():
            walk(h + ((q, a),), ah + (a,), prob * p)

    walk((), (), Fraction(1))
    return FiniteDist.from_dict(out)


def view_pair(m: FiniteMechanism, adv: AdversaryStrategy) -> tuple[FiniteDist, FiniteDist]:
    return view_dist(m, adv, 0), view_dist(m, adv, 1)


def _leaf_masses(m: FiniteMechanism, h: History, ah: tuple):
    """Yield (policy, p0 list, p1 list) for every strategy rooted at h."""
    if len(h) >= m.rounds:
        yield {}, [Fraction(1)], [Fraction(1)]
        return
    for q in m.queries(h):
        answers = m.answers(h, q)
        d0, d1 = m.response(0, h, q).as_dict(), m.response(1, h, q).as_dict()
        children = [list(_leaf_masses(m, h + ((q, a),), ah + (a,))) for a in answers]
        for combo in product(*children):
            pol = {ah: q}
            p0, p1 = [], []
            for a, (cp, c0, c1) in zip(answers, combo):
                pol.update(cp)
                w0, w1 = d0[a], d1[a]
                p0.extend(w0 * x for x in c0)
                p1.extend(w1 * x for x in c1)
            yield pol, p0, p1


def worst_adversary_enumerated(m: FiniteMechanism, delta, limits: Limits | None = DEFAULT_LIMITS):
    """Brute force: least scale of every deterministic strategy, maximized."""
    delta = as_prob(delta)
    if delta >= 1:
        raise InvariantViolation("delta must be < 1")
    if limits is not None:
        m.check_limits(limits)
    best_u, best_pol = None, None
    for pol, p0, p1 in _leaf_masses(m, (), ()):
        u = max(least_scale(p0, p1, delta), least_scale(p1, p0, delta))
        if best_u is None or u > best_u:
            best_u, best_pol = u, pol
    return Fraction(best_u), AdversaryStrategy(best_pol, m.rounds)


def best_response(m: FiniteMechanism, scale, src: int = 0):
    """Strategy maximizing sum max(P_src - u * P_other, 0) over transcripts.

    The objective is a sum over leaves, so the choice at each history only
    affects its own subtree and the optimum is found by backward induction.
    Returns (value, policy).
    """
    u = Fraction(scale)
    dst = 1 - src

    def rec(h, ah, ps, pt):
        if len(h) >= m.rounds:
            v = ps - u * pt
            return (v if v > 0 else Fraction(0)), {}
        best = None
        for q in m.queries(h):
            ds, dt = m.response(src, h, q).as_dict(), m.response(dst, h, q).as_dict()
            total, pol = Fraction(0), {ah: q}
            for a in ds:
                v, cp = rec(h + ((q, a),), ah + (a,), ps * ds[a], pt * dt[a])
                total += v
                pol.update(cp)
            if best is None or total > best[0]:
                best = (total, pol)
        return best

    return rec((), (), Fraction(1), Fraction(1))


def worst_adversary(m: FiniteMechanism, delta, limits: Limits | None = DEFAULT_LIMITS):
    """(u, strategy) with u the largest least-scale over all deterministic strategies.

    Iterates: take the best response at the current scale; if its hockey-stick
    exceeds delta, jump to that strategy's own least scale. Each jump strictly
    raises u and lands on some strategy's threshold, so it stops after finitely
    many steps at the maximum threshold. Both input orderings are covered.
    """
    delta = as_prob(delta)
    if delta >= 1:
        raise InvariantViolation("delta must be < 1")
    if limits is not None:
        m.check_limits(limits)
    u = Fraction(1)
    worst = None
    while True:
        value, pol = max((best_response(m, u, src) for src in (0, 1)), key=lambda r: r[0])
        if worst is None:
            worst = pol
        if value <= delta:
            return u, AdversaryStrategy(worst, m.rounds)
        adv = AdversaryStrategy(pol, m.rounds)
        p0, p1 = view_pair(m, adv)
        pp, qq = p0.aligned(p1)
        new_u = Fraction(max(least_scale(pp, qq, delta), least_scale(qq, pp, delta)))
        if new_u <= u:
            raise RuntimeError("best-response iteration failed to make progress")
        u, worst = new_u, pol


def priv_loss(m: FiniteMechanism, delta, limits: Limits | None = DEFAULT_LIMITS) -> Fraction:
    """PrivLoss as a scale: the least u = e^eps such that m is (eps, delta)-DP.

    Raises ``UnboundedEpsilonError`` if some strategy separates the inputs by
    more than delta.
    """
    return worst_adversary(m, delta, limits)[0]
