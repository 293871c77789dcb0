"""Finite interactive mechanisms as transcript trees.

A mechanism answers, for each of the two fixed inputs b in {0, 1}, a query
given the history of earlier (query, answer) pairs. Histories are tuples of
``(query, answer)`` string pairs; answers at a node are drawn from a
``FiniteDist`` whose support is identical for both inputs.
"""

from __future__ import annotations

import io
import json
import os
from collections import deque
from dataclasses import astuple, dataclass, fields
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import InvariantViolation, LimitExceededError, MechanismFormatError
from .prob import FiniteDist, as_prob, format_rational, parse_rational

History = tuple  # tuple[tuple[str, str], ...]

DUMMY_QUERY = "_"
NULL_QUERY = "0"
REAL_PREFIX = "1"
BOTTOM = "⊥"
HALT = "halt"
IAM0, IAM1 = "Iam0", "Iam1"

FORMAT_VERSION = 1


@dataclass(frozen=True)
class Limits:
    """Enumeration limits. Adversary enumeration is doubly exponential in depth."""

    max_rounds: int = 4
    max_queries: int = 4
    max_answers: int = 4


DEFAULT_LIMITS = Limits()


def history_key(history: History, query: str) -> str:
    flat = [label for pair in history for label in pair]
    return ",".join(flat) + "|" + query


def parse_history_key(key: str) -> tuple[History, str]:
    if key.count("|") != 1:
        raise MechanismFormatError(f"history key {key!r} must contain exactly one '|'")
    hist, query = key.split("|")
    labels = hist.split(",") if hist else []
    if len(labels) % 2:
        raise MechanismFormatError(f"history key {key!r} has an odd number of labels")
    pairs = tuple((labels[i], labels[i + 1]) for i in range(0, len(labels), 2))
    return pairs, query


class FiniteMechanism:
    """Interface for a bounded-round interactive mechanism on inputs {0, 1}."""

    rounds: int
    input_labels: tuple[str, str] = ("x0", "x1")

    def queries(self, history: History) -> tuple[str, ...]:
        """Queries the mechanism accepts after ``history``."""
        raise NotImplementedError

    def response(self, b: int, history: History, query: str) -> FiniteDist:
        raise NotImplementedError

    def answers(self, history: History, query: str) -> tuple[str, ...]:
        return self.response(0, history, query).support

    def nodes(self) -> Iterator[tuple[History, str]]:
        """Breadth-first walk over every reachable (history, query) node."""
        frontier = deque([()])
        while frontier:
            h = frontier.popleft()
            if len(h) >= self.rounds:
                continue
            for q in self.queries(h):
                yield h, q
                for a in self.answers(h, q):
                    frontier.append(h + ((q, a),))

    def alphabets(self) -> tuple[list[list[str]], list[list[str]]]:
        qa = [[] for _ in range(self.rounds)]
        aa = [[] for _ in range(self.rounds)]
        for h, q in self.nodes():
            i = len(h)
            if q not in qa[i]:
                qa[i].append(q)
            for a in self.answers(h, q):
                if a not in aa[i]:
                    aa[i].append(a)
        return qa, aa

    def check_limits(self, limits: Limits = DEFAULT_LIMITS) -> None:
        if self.rounds > limits.max_rounds:
            raise LimitExceededError(
                f"mechanism has {self.rounds} rounds; limit is {limits.max_rounds}"
            )
        for h, q in self.nodes():
            nq = len(self.queries(h))
            if nq > limits.max_queries:
                raise LimitExceededError(
                    f"{nq} queries available after {history_key(h, '')!r}; limit is {limits.max_queries}"
                )
            na = len(self.answers(h, q))
            if na > limits.max_answers:
                raise LimitExceededError(
                    f"{na} answers at {history_key(h, q)!r}; limit is {limits.max_answers}"
                )


class TableMechanism(FiniteMechanism):
    """Mechanism given by explicit branch tables for both inputs."""

    def __init__(
        self,
        rounds: int,
        branches: Sequence[dict],
        query_alphabet: Sequence[Sequence[str]] | None = None,
        answer_alphabet: Sequence[Sequence[str]] | None = None,
        input_labels: tuple[str, str] = ("x0", "x1"),
    ):
        if rounds < 1:
            raise InvariantViolation("rounds must be positive")
        if len(branches) != 2:
            raise InvariantViolation("need branch tables for exactly two inputs")
        self.rounds = rounds
        self.input_labels = tuple(input_labels)
        self.branches = tuple(dict(t) for t in branches)
        self._queries: dict[History, list[str]] = {}
        for h, q in self.branches[0]:
            self._queries.setdefault(h, []).append(q)
        self._validate()
        qa, aa = super().alphabets()
        self.query_alphabet = [list(x) for x in query_alphabet] if query_alphabet else qa
        self.answer_alphabet = [list(x) for x in answer_alphabet] if answer_alphabet else aa
        self._check_typing()

    def queries(self, history):
        return tuple(self._queries.get(history, ()))

    def response(self, b, history, query):
        return self.branches[b][(history, query)]

    def alphabets(self):
        return self.query_alphabet, self.answer_alphabet

    def _validate(self):
        t0, t1 = self.branches
        if set(t0) != set(t1):
            extra = sorted(history_key(*k) for k in set(t0) ^ set(t1))
            raise InvariantViolation(f"ragged mechanism: nodes defined for one input only: {extra}")
        for key, d0 in t0.items():
            if set(d0.support) != set(t1[key].support):
                raise InvariantViolation(f"ragged mechanism: answer sets differ at {history_key(*key)!r}")
            for label in (key[1], *d0.support):
                if not isinstance(label, str) or "," in label or "|" in label:
                    raise InvariantViolation(f"bad label {label!r} at {history_key(*key)!r}")
        seen = set()
        frontier = deque([()])
        while frontier:
            h = frontier.popleft()
            if len(h) >= self.rounds:
                continue
            qs = self._queries.get(h)
            if not qs:
                raise InvariantViolation(f"no branch defined for reachable history {history_key(h, '')!r}")
            for q in qs:
                seen.add((h, q))
                for a in t0[(h, q)].support:
                    frontier.append(h + ((q, a),))
        unreachable = set(t0) - seen
        if unreachable:
            raise InvariantViolation(
                f"branches at unreachable histories: {sorted(history_key(*k) for k in unreachable)}"
            )

    def _check_typing(self):
        if len(self.query_alphabet) != self.rounds or len(self.answer_alphabet) != self.rounds:
            raise InvariantViolation("alphabets must list one label set per round")
        for (h, q), d in self.branches[0].items():
            i = len(h)
            if q not in self.query_alphabet[i]:
                raise InvariantViolation(f"query {q!r} not in round-{i} alphabet")
            bad = [a for a in d.support if a not in self.answer_alphabet[i]]
            if bad:
                raise InvariantViolation(f"answers {bad} not in round-{i} alphabet")


def tabulate(m: FiniteMechanism) -> TableMechanism:
    """Materialize any mechanism into explicit branch tables."""
    if isinstance(m, TableMechanism):
        return m
    t0, t1 = {}, {}
    for h, q in m.nodes():
        t0[(h, q)] = m.response(0, h, q)
        t1[(h, q)] = m.response(1, h, q)
    qa, aa = m.alphabets()
    return TableMechanism(m.rounds, (t0, t1), qa, aa, m.input_labels)


def _scale(u) -> Fraction:
    u = Fraction(u)
    if u < 1:
        raise InvariantViolation(f"scale e^eps must be >= 1, got {u}")
    return u


def rr_pure(scale) -> TableMechanism:
    """One-round randomized response: reports b w.p. u/(1+u)."""
    u = _scale(scale)
    keep, flip = u / (1 + u), 1 / (1 + u)
    node = ((), DUMMY_QUERY)
    return TableMechanism(
        1,
        (
            {node: FiniteDist(("0", "1"), (keep, flip))},
            {node: FiniteDist(("0", "1"), (flip, keep))},
        ),
    )


def rr_approx(scale, delta) -> TableMechanism:
    """RR_(eps, delta): with probability delta announces the input outright."""
    u = _scale(scale)
    delta = as_prob(delta)
    if delta >= 1:
        raise InvariantViolation("delta must be < 1")
    keep, flip = (1 - delta) * u / (1 + u), (1 - delta) / (1 + u)
    out = ("0", "1", IAM0, IAM1)
    node = ((), DUMMY_QUERY)
    return TableMechanism(
        1,
        (
            {node: FiniteDist(out, (keep, flip, delta, 0))},
            {node: FiniteDist(out, (flip, keep, 0, delta))},
        ),
    )


@dataclass(frozen=True)
class TwoRoundParams:
    """Parameters of the 2-round 1-bit mechanism.

    ``p0`` is Pr[a0 = 0] on input 0; ``pij`` is Pr[a1 = 0 | a0 = i, q1 = j] on
    input 0. The ``*_prime`` fields are the same quantities on input 1.
    """

    p0: Fraction
    p00: Fraction
    p01: Fraction
    p10: Fraction
    p11: Fraction
    p0_prime: Fraction
    p00_prime: Fraction
    p01_prime: Fraction
    p10_prime: Fraction
    p11_prime: Fraction

    NAMES = ("p0", "p00", "p01", "p10", "p11", "p0'", "p00'", "p01'", "p10'", "p11'")

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, as_prob(getattr(self, f.name)))

    @classmethod
    def from_tuple(cls, values) -> "TwoRoundParams":
        return cls(*values)

    def as_tuple(self) -> tuple:
        return astuple(self)


def two_round(p: TwoRoundParams) -> TableMechanism:
    vals = p.as_tuple()
    tables = []
    for first, cond in ((vals[0], vals[1:5]), (vals[5], vals[6:10])):
        t = {((), DUMMY_QUERY): FiniteDist(("0", "1"), (first, 1 - first))}
        for i, a0 in enumerate("01"):
            h = ((DUMMY_QUERY, a0),)
            for j, q in enumerate("01"):
                c = cond[2 * i + j]
                t[(h, q)] = FiniteDist(("0", "1"), (c, 1 - c))
        tables.append(t)
    return TableMechanism(2, tables, [[DUMMY_QUERY], ["0", "1"]], [["0", "1"], ["0", "1"]])


class NullExtension(FiniteMechanism):
    """Mechanism that ignores null queries.

    Real queries are the base labels prefixed with ``"1"``; the null query is
    ``"0"`` and is always answered with ``BOTTOM``. ``capacity`` bounds the total
    number of messages (null plus real).
    """

    def __init__(self, base: FiniteMechanism, capacity: int | None = None):
        self.base = base
        self.rounds = 2 * base.rounds if capacity is None else capacity
        self.input_labels = base.input_labels

    @staticmethod
    def inner_history(history: History) -> History:
        return tuple((q[1:], a) for q, a in history if q != NULL_QUERY)

    def queries(self, history):
        if len(history) >= self.rounds:
            return ()
        inner = self.inner_history(history)
        real = ()
        if len(inner) < self.base.rounds:
            real = tuple(REAL_PREFIX + q for q in self.base.queries(inner))
        return (NULL_QUERY,) + real

    def response(self, b, history, query):
        if query == NULL_QUERY:
            return FiniteDist.point(BOTTOM)
        return self.base.response(b, self.inner_history(history), query[len(REAL_PREFIX):])


def null_extension(m: FiniteMechanism, capacity: int | None = None) -> NullExtension:
    return NullExtension(m, capacity)


def mechanism_to_json(m: FiniteMechanism) -> dict:
    t = tabulate(m)
    branches = {}
    for label, table in zip(t.input_labels, t.branches):
        branches[label] = {
            history_key(h, q): {a: format_rational(p) for a, p in d.items()}
            for (h, q), d in table.items()
        }
    return {
        "version": FORMAT_VERSION,
        "rounds": t.rounds,
        "query_alphabet": t.query_alphabet,
        "answer_alphabet": t.answer_alphabet,
        "branches": branches,
    }


def dumps_mechanism(m: FiniteMechanism) -> str:
    return json.dumps(mechanism_to_json(m), indent=2, ensure_ascii=False) + "\n"


def save_mechanism(m: FiniteMechanism, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_mechanism(m))


def _line_of(text: str, needle: str) -> int | None:
    for n, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return n
    return None


def loads_mechanism(text: str) -> TableMechanism:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MechanismFormatError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise MechanismFormatError("top level must be an object", line=1)
    for name in ("version", "rounds", "query_alphabet", "answer_alphabet", "branches"):
        if name not in doc:
            raise MechanismFormatError("missing field", field=name)
    if doc["version"] != FORMAT_VERSION:
        raise MechanismFormatError(f"unsupported version {doc['version']!r}", field="version")
    rounds = doc["rounds"]
    if not isinstance(rounds, int) or rounds < 1:
        raise MechanismFormatError("rounds must be a positive integer", field="rounds")
    branches = doc["branches"]
    if not isinstance(branches, dict) or len(branches) != 2:
        raise MechanismFormatError("branches must hold exactly two inputs", field="branches")
    labels = tuple(branches)
    tables = []
    for label in labels:
        table = {}
        if not isinstance(branches[label], dict):
            raise MechanismFormatError("branch table must be an object", field=f"branches.{label}")
        for key, masses in branches[label].items():
            where = f"branches.{label}[{key!r}]"
            line = _line_of(text, json.dumps(key, ensure_ascii=False))
            try:
                node = parse_history_key(key)
                if not isinstance(masses, dict):
                    raise InvariantViolation("answer masses must be an object")
                probs = {a: parse_rational(p) for a, p in masses.items()}
                table[node] = FiniteDist.from_dict(probs)
            except InvariantViolation as exc:
                raise MechanismFormatError(f"bad branch: {exc}", line=line, field=where) from exc
        tables.append(table)
    try:
        return TableMechanism(
            rounds, tables, doc["query_alphabet"], doc["answer_alphabet"], labels
        )
    except MechanismFormatError:
        raise
    except InvariantViolation as exc:
        raise MechanismFormatError(str(exc), field="branches") from exc


def load_mechanism(path) -> TableMechanism:
    if isinstance(path, io.TextIOBase):
        return loads_mechanism(path.read())
    with open(os.fspath(path), encoding="utf-8") as fh:
        return loads_mechanism(fh.read())
