"""Random instance generators shared by the test modules."""

import random
from fractions import Fraction

from hypothesis import strategies as st

from interdp.adversary import priv_loss
from interdp.errors import UnboundedEpsilonError
from interdp.mechanism import TwoRoundParams, two_round
from interdp.prob import FiniteDist


def rand_prob(rng: random.Random, den: int = 64, lo: int = 0) -> Fraction:
    return Fraction(rng.randint(lo, den - lo), den)


def rand_params(rng: random.Random, den: int = 64, interior: bool = False) -> TwoRoundParams:
    lo = 1 if interior else 0
    return TwoRoundParams.from_tuple(rand_prob(rng, den, lo) for _ in range(10))


def rand_pure_two_round(rng: random.Random, den: int = 64):
    """Two-round mechanism with finite pure PrivLoss (rejection sampled)."""
    while True:
        m = two_round(rand_params(rng, den))
        try:
            return m, priv_loss(m, 0)
        except UnboundedEpsilonError:
            continue


def rand_dist(rng: random.Random, n: int, den: int = 97, zeros: bool = True) -> list[Fraction]:
    w = [rng.randint(0 if zeros else 1, den) for _ in range(n)]
    if sum(w) == 0:
        w[0] = 1
    s = sum(w)
    return [Fraction(x, s) for x in w]


@st.composite
def dist_pairs(draw, max_size=8):
    n = draw(st.integers(1, max_size))
    raw_p = draw(st.lists(st.integers(0, 50), min_size=n, max_size=n).filter(any))
    raw_q = draw(st.lists(st.integers(0, 50), min_size=n, max_size=n).filter(any))
    labels = [str(i) for i in range(n)]
    p = FiniteDist(labels, [Fraction(x, sum(raw_p)) for x in raw_p])
    q = FiniteDist(labels, [Fraction(x, sum(raw_q)) for x in raw_q])
    return p, q


scales = st.fractions(min_value=1, max_value=20, max_denominator=50)


def rand_one_round(rng: random.Random, n_queries: int = 1, n_answers: int = 2, den: int = 32):
    """Random 1-round mechanism; every answer has positive mass on both inputs."""
    from interdp.mechanism import TableMechanism

    answers = [str(i) for i in range(n_answers)]
    queries = [f"q{i}" for i in range(n_queries)]
    tables = ({}, {})
    for q in queries:
        for t in tables:
            t[((), q)] = FiniteDist(answers, rand_dist(rng, n_answers, den, zeros=False))
    return TableMechanism(1, tables, [queries], [answers])


def rand_small_mechanism(rng: random.Random):
    kind = rng.choice(("two_round", "binary", "ternary", "two_query"))
    if kind == "two_round":
        return two_round(rand_params(rng, 32))
    if kind == "binary":
        return rand_one_round(rng, 1, 2)
    if kind == "ternary":
        return rand_one_round(rng, 1, 3)
    return rand_one_round(rng, 2, 2)


def leaf_paths(m, h=()):
    """Every full-depth (query, answer) path of a mechanism."""
    if len(h) >= m.rounds:
        yield h
        return
    for q in m.queries(h):
        for a in m.answers(h, q):
            yield from leaf_paths(m, h + ((q, a),))


def strategy_through(m, path):
    """A deterministic strategy that follows ``path`` and plays the first query elsewhere."""
    from interdp.adversary import AdversaryStrategy

    on_path = {tuple(a for _, a in path[:i]): path[i][0] for i in range(len(path))}
    policy = {}

    def walk(h, ah):
        if len(h) >= m.rounds:
            return
        q = on_path.get(ah) if h == path[: len(h)] else None
        q = q or m.queries(h)[0]
        policy[ah] = q
        for a in m.answers(h, q):
            walk(h + ((q, a),), ah + (a,))

    walk((), ())
    return AdversaryStrategy(policy, m.rounds)
