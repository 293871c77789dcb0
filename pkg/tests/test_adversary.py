from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import rand_params, rand_pure_two_round
from interdp.adversary import (
    AdversaryStrategy,
    best_response,
    count_adversaries,
    count_by_product,
    enumerate_adversaries,
    priv_loss,
    view_dist,
    worst_adversary,
    worst_adversary_enumerated,
)
from interdp.composition import concomp, ordered_concomp
from interdp.errors import InvariantViolation, UnboundedEpsilonError
from interdp.mechanism import TwoRoundParams, rr_approx, rr_pure, two_round
from interdp.prob import FiniteDist, hockey_stick, least_scale

HALF = F(1, 2)


def test_counts():
    m = two_round(TwoRoundParams.from_tuple([HALF] * 10))
    advs = enumerate_adversaries(m)
    assert len(advs) == 4
    assert len({tuple(sorted(a.policy.items())) for a in advs}) == 4
    assert len(enumerate_adversaries(rr_pure(2))) == 1


def test_concomp_count_matches_recursion():
    m = two_round(TwoRoundParams.from_tuple([HALF] * 10))
    ordered = ordered_concomp([m, m])
    assert count_by_product(ordered) == count_adversaries(ordered) == len(enumerate_adversaries(ordered))
    free = concomp([m, m])
    assert count_adversaries(free) == 165_888


def test_view_examples():
    adv = enumerate_adversaries(rr_pure(2))[0]
    assert view_dist(rr_pure(2), adv, 0).as_dict() == {("0",): F(2, 3), ("1",): F(1, 3)}


def test_strategy_json_roundtrip():
    m = two_round(TwoRoundParams.from_tuple([HALF] * 10))
    for adv in enumerate_adversaries(m):
        doc = adv.to_json()
        assert set(doc) == {"", "0", "1"}
        assert AdversaryStrategy.from_json(doc, 2) == adv


def test_incompatible_strategy():
    m = rr_pure(2)
    with pytest.raises(InvariantViolation):
        view_dist(m, AdversaryStrategy({(): "nope"}, 1), 0)


@pytest.mark.parametrize("u", [F(3, 2), 2, 5, 100, F(7, 3)])
def test_rr_priv_loss(u):
    assert priv_loss(rr_pure(u), 0) == u


def test_input_independent():
    m = two_round(TwoRoundParams.from_tuple([F(1, 3)] * 10))
    for d in (0, F(1, 10)):
        assert priv_loss(m, d) == 1


def test_unbounded():
    m = two_round(TwoRoundParams.from_tuple([1] + [HALF] * 4 + [0] + [HALF] * 4))
    with pytest.raises(UnboundedEpsilonError):
        priv_loss(m, 0)


def test_rr_first_round_only():
    p = TwoRoundParams.from_tuple([F(2, 3)] + [HALF] * 4 + [F(1, 3)] + [HALF] * 4)
    assert priv_loss(two_round(p), 0) == 2


def test_rr_approx_priv_loss():
    # RR_(u, delta) is exactly (ln u, delta)-DP
    assert priv_loss(rr_approx(3, F(1, 10)), F(1, 10)) == 3
    with pytest.raises(UnboundedEpsilonError):
        priv_loss(rr_approx(3, F(1, 10)), F(1, 20))


def test_best_response_matches_enumeration(rng):
    for _ in range(20):
        m = two_round(rand_params(rng, den=16))
        u = F(rng.randint(1, 40), 8) + 1
        for src in (0, 1):
            value, _ = best_response(m, u, src)
            brute = max(
                hockey_stick(*(view_dist(m, a, src), view_dist(m, a, 1 - src)), u)
                for a in enumerate_adversaries(m)
            )
            assert value == brute


def test_dp_iteration_matches_enumeration(rng):
    for _ in range(40):
        m = two_round(rand_params(rng, den=32))
        delta = F(rng.randint(0, 10), 40)
        try:
            want = worst_adversary_enumerated(m, delta)[0]
        except UnboundedEpsilonError:
            with pytest.raises(UnboundedEpsilonError):
                priv_loss(m, delta)
            continue
        u, adv = worst_adversary(m, delta)
        assert u == want
        v0, v1 = view_dist(m, adv, 0), view_dist(m, adv, 1)
        pp, qq = v0.aligned(v1)
        assert max(least_scale(pp, qq, delta), least_scale(qq, pp, delta)) == u


def test_dp_iteration_on_composition(rng):
    m0, _ = rand_pure_two_round(rng, den=8)
    comp = concomp([m0, rr_pure(2)])
    assert priv_loss(comp, F(1, 100)) == worst_adversary_enumerated(comp, F(1, 100))[0]


def test_nonincreasing_in_delta(rng):
    m = two_round(rand_params(rng, interior=True))
    prev = None
    for d in [F(i, 20) for i in range(0, 10)]:
        u = priv_loss(m, d)
        if prev is not None:
            assert u <= prev
        prev = u


def test_randomized_adversaries_no_worse(rng):
    m = two_round(rand_params(rng, interior=True))
    delta = F(1, 20)
    u = priv_loss(m, delta)
    advs = enumerate_adversaries(m)
    for _ in range(30):
        w = [F(rng.randint(0, 9)) for _ in advs]
        w[0] += 1
        total = sum(w)
        views = []
        for b in (0, 1):
            mix: dict = {}
            for wi, a in zip(w, advs):
                for y, p in view_dist(m, a, b).items():
                    mix[y] = mix.get(y, 0) + wi / total * p
            views.append(FiniteDist.from_dict(mix))
        assert hockey_stick(views[0], views[1], u) <= delta
        assert hockey_stick(views[1], views[0], u) <= delta


def test_post_processing(rng):
    m = two_round(rand_params(rng, interior=True))
    delta = F(1, 50)
    u = priv_loss(m, delta)
    for adv in enumerate_adversaries(m):
        for f in (lambda y: y[0], lambda y: y[0] == y[1], lambda y: y[1]):
            v0 = view_dist(m, adv, 0).map(f)
            v1 = view_dist(m, adv, 1).map(f)
            pp, qq = v0.aligned(v1)
            assert max(least_scale(pp, qq, delta), least_scale(qq, pp, delta)) <= u


def test_pure_concurrent_composition(rng):
    for _ in range(3):
        m0, u0 = rand_pure_two_round(rng, den=16)
        m1, u1 = rand_pure_two_round(rng, den=16)
        assert priv_loss(concomp([m0, m1]), 0) <= u0 * u1
    assert priv_loss(concomp([rr_pure(2), rr_pure(3)]), 0) == 6


@given(st.fractions(min_value=1, max_value=50, max_denominator=20), st.integers(0, 9))
def test_rr_priv_loss_property(u, d):
    delta = F(d, 10)
    m = rr_pure(u)
    # RR's hockey-stick at scale v < u is (u - v)/(1 + u)
    expected = max(u - delta * (1 + u), 1)
    assert priv_loss(m, delta) == expected
