"""Concurrent composition of interactive mechanisms.

``ConComp`` lets the adversary address any component at any time with a
tagged query ``"j:q"``. ``OrderedConComp`` routes round i to component
i mod k. Both are evaluated lazily; use ``mechanism.tabulate`` to materialize.
"""

from __future__ import annotations

from typing import Sequence

from .adversary import AdversaryStrategy
from .errors import InvariantViolation, LimitExceededError
from .mechanism import (
    BOTTOM,
    DEFAULT_LIMITS,
    HALT,
    NULL_QUERY,
    REAL_PREFIX,
    FiniteMechanism,
    History,
    Limits,
    NullExtension,
)
from .prob import FiniteDist

__all__ = [
    "ConComp",
    "OrderedConComp",
    "concomp",
    "ordered_concomp",
    "tag",
    "parse_tag",
    "ordered_normal_form",
    "translate_strategy",
    "strip_nulls",
]


def tag(j: int, q: str) -> str:
    return f"{j}:{q}"


def parse_tag(label: str, k: int) -> tuple[int, str]:
    head, sep, q = label.partition(":")
    if not sep or not head.isdigit():
        raise InvariantViolation(f"cannot parse tagged query {label!r}")
    j = int(head)
    if j >= k:
        raise InvariantViolation(f"mechanism index {j} out of range for k={k}")
    return j, q


def _check_depth(rounds: int, limits: Limits | None):
    if limits is not None and rounds > limits.max_rounds:
        raise LimitExceededError(f"composed depth {rounds} exceeds limit {limits.max_rounds}")


class ConComp(FiniteMechanism):
    """Free-order concurrent composition with independent component coins.

    ``inputs[j] = (i0, i1)`` says which input of component j is used when the
    composition runs on input 0 and on input 1; the default (0, 1) for every
    component is composition over a single dataset.
    """

    def __init__(self, ms: Sequence[FiniteMechanism], inputs=None, limits: Limits | None = DEFAULT_LIMITS):
        if not ms:
            raise InvariantViolation("need at least one mechanism")
        self.ms = tuple(ms)
        self.k = len(self.ms)
        self.inputs = tuple(tuple(p) for p in inputs) if inputs is not None else ((0, 1),) * self.k
        if len(self.inputs) != self.k:
            raise InvariantViolation("one input pair per component required")
        self.rounds = sum(m.rounds for m in self.ms)
        _check_depth(self.rounds, limits)

    def sub_history(self, history: History, j: int) -> History:
        out = []
        for label, a in history:
            jj, q = parse_tag(label, self.k)
            if jj == j:
                out.append((q, a))
        return tuple(out)

    def queries(self, history):
        if len(history) >= self.rounds:
            return ()
        out = []
        for j, m in enumerate(self.ms):
            sub = self.sub_history(history, j)
            if len(sub) < m.rounds:
                out.extend(tag(j, q) for q in m.queries(sub))
        return tuple(out)

    def response(self, b, history, query):
        j, q = parse_tag(query, self.k)
        sub = self.sub_history(history, j)
        m = self.ms[j]
        if len(sub) >= m.rounds:
            raise InvariantViolation(f"component {j} has no rounds left")
        return m.response(self.inputs[j][b], sub, q)


class OrderedConComp(FiniteMechanism):
    """Round-robin composition: message i goes to component i mod k.

    A component that has used up its rounds answers the padding query
    ``HALT`` with ``HALT``.
    """

    def __init__(self, ms: Sequence[FiniteMechanism], limits: Limits | None = DEFAULT_LIMITS):
        if not ms:
            raise InvariantViolation("need at least one mechanism")
        self.ms = tuple(ms)
        self.k = len(self.ms)
        self.rounds = max(j + self.k * (m.rounds - 1) for j, m in enumerate(self.ms)) + 1
        _check_depth(self.rounds, limits)

    def _route(self, history):
        i = len(history)
        j = i % self.k
        sub = tuple(history[j :: self.k])
        return j, sub

    def queries(self, history):
        if len(history) >= self.rounds:
            return ()
        j, sub = self._route(history)
        if len(sub) >= self.ms[j].rounds:
            return (HALT,)
        return self.ms[j].queries(sub)

    def response(self, b, history, query):
        j, sub = self._route(history)
        if len(sub) >= self.ms[j].rounds:
            return FiniteDist.point(HALT)
        return self.ms[j].response(b, sub, query)


def concomp(ms, inputs=None, limits: Limits | None = DEFAULT_LIMITS) -> ConComp:
    return ConComp(ms, inputs, limits)


def ordered_concomp(ms, limits: Limits | None = DEFAULT_LIMITS) -> OrderedConComp:
    return OrderedConComp(ms, limits)


def ordered_normal_form(ms: Sequence[FiniteMechanism]) -> OrderedConComp:
    """Ordered composition of null extensions able to replay any free-order schedule.

    With N = total rounds, each real query needs at most one message per
    component, so capacity N per component and k * N ordered rounds suffice.
    """
    n = sum(m.rounds for m in ms)
    return OrderedConComp([NullExtension(m, n) for m in ms], limits=None)


def translate_strategy(
    adv: AdversaryStrategy, ms: Sequence[FiniteMechanism], target: FiniteMechanism | None = None
) -> AdversaryStrategy:
    """Rewrite a free-order strategy as a strategy against ``ordered_normal_form(ms)``.

    Before each real query to component t (the previous one went to s), null
    queries go to components s+1, ..., t-1 (mod k). After the last real query
    the remaining slots are filled with nulls. ``target`` may pass a
    pre-tabulated copy of ``ordered_normal_form(ms)``.
    """
    k = len(ms)
    if target is None:
        target = ordered_normal_form(ms)
    policy = {}

    def walk(h, ah):
        if len(h) >= target.rounds:
            return
        real = strip_nulls(ah)
        here = len(h) % k
        if len(real) < adv.depth:
            j, q = parse_tag(adv.query(real), k)
            label = REAL_PREFIX + q if j == here else NULL_QUERY
        else:
            label = NULL_QUERY
        policy[ah] = label
        for a in target.answers(h, label):
            walk(h + ((label, a),), ah + (a,))

    walk((), ())
    return AdversaryStrategy(policy, target.rounds)


def strip_nulls(answers: tuple) -> tuple:
    """Post-processing that deletes the answers to null queries."""
    return tuple(a for a in answers if a != BOTTOM)
