import os
from fractions import Fraction as F

import pytest

from helpers import leaf_paths, rand_params, rand_small_mechanism, strategy_through
from interdp.adversary import AdversaryStrategy, enumerate_adversaries, view_dist
from interdp.composition import (
    ConComp,
    concomp,
    ordered_concomp,
    ordered_normal_form,
    parse_tag,
    strip_nulls,
    tag,
    translate_strategy,
)
from interdp.errors import InvariantViolation, LimitExceededError
from interdp.mechanism import (
    BOTTOM,
    Limits,
    TwoRoundParams,
    dumps_mechanism,
    loads_mechanism,
    rr_pure,
    tabulate,
    two_round,
)


def product_law(*laws):
    out = {(): F(1)}
    for law in laws:
        out = {k + (a,): p * q for k, p in out.items() for a, q in law.items()}
    return out


def test_tags():
    assert tag(1, "q") == "1:q"
    assert parse_tag("1:q:x", 2) == (1, "q:x")
    with pytest.raises(InvariantViolation):
        parse_tag("2:q", 2)
    with pytest.raises(InvariantViolation):
        parse_tag("q", 2)


def test_single_component(rng):
    m = two_round(rand_params(rng))
    c = concomp([m])
    for adv in enumerate_adversaries(m):
        tagged = AdversaryStrategy({ah: tag(0, q) for ah, q in adv.policy.items()}, adv.depth)
        for b in (0, 1):
            assert view_dist(c, tagged, b) == view_dist(m, adv, b)


def test_rr_product():
    c = concomp([rr_pure(2), rr_pure(2)])
    adv = AdversaryStrategy({(): "0:_", ("0",): "1:_", ("1",): "1:_"}, 2)
    law = {"0": F(2, 3), "1": F(1, 3)}
    assert view_dist(c, adv, 0).as_dict() == product_law(law, law)


def test_ordered_rr_product():
    o = ordered_concomp([rr_pure(2), rr_pure(3)])
    adv = enumerate_adversaries(o)[0]
    got = view_dist(o, adv, 0).as_dict()
    assert got == product_law({"0": F(2, 3), "1": F(1, 3)}, {"0": F(3, 4), "1": F(1, 4)})


def test_ordered_single(rng):
    m = two_round(rand_params(rng))
    o = ordered_concomp([m])
    for adv in enumerate_adversaries(m):
        for b in (0, 1):
            assert view_dist(o, adv, b) == view_dist(m, adv, b)


def test_adaptive_cross_query(rng):
    m0 = rr_pure(2)
    m1 = two_round(rand_params(rng))
    c = concomp([m0, m1])
    # ask m0 first, then m1's first round, then choose m1's second query from m0's answer
    f = {"0": "1", "1": "0"}
    policy = {(): "0:_"}
    for a0 in "01":
        policy[(a0,)] = "1:_"
        for a1 in "01":
            policy[(a0, a1)] = "1:" + f[a0]
    adv = AdversaryStrategy(policy, 3)
    for b in (0, 1):
        want = {}
        for a0, p0 in m0.response(b, (), "_").items():
            for a1, p1 in m1.response(b, (), "_").items():
                for a2, p2 in m1.response(b, (("_", a1),), f[a0]).items():
                    want[(a0, a1, a2)] = p0 * p1 * p2
        assert view_dist(c, adv, b).as_dict() == want


def test_halt_padding():
    o = ordered_concomp([two_round(TwoRoundParams.from_tuple([F(1, 2)] * 10)), rr_pure(2)])
    assert o.rounds == 3
    h = (("_", "0"), ("_", "1"))
    assert o.queries(h) == ("0", "1")
    o3 = ordered_concomp([rr_pure(2), two_round(TwoRoundParams.from_tuple([F(1, 2)] * 10))])
    assert o3.rounds == 4
    assert o3.queries((("_", "0"), ("_", "1"))) == ("halt",)


def test_depth_limit():
    m = two_round(TwoRoundParams.from_tuple([F(1, 2)] * 10))
    with pytest.raises(LimitExceededError):
        concomp([m, m, m])
    assert concomp([m, m, m], limits=Limits(max_rounds=6)).rounds == 6


def test_serialized_tags_roundtrip():
    c = concomp([rr_pure(2), rr_pure(3)])
    t = loads_mechanism(dumps_mechanism(c))
    assert "0:_" in t.query_alphabet[0]
    assert t.branches == tabulate(c).branches


def test_distinct_inputs_vector():
    c = ConComp([rr_pure(2), rr_pure(2)], inputs=[(0, 1), (0, 0)])
    assert c.response(1, (), "1:_") == rr_pure(2).response(0, (), "_")


def test_independent_schedule(rng):
    ms = [two_round(rand_params(rng)), rr_pure(3)]
    c = concomp(ms)
    # oblivious alternating schedule with fixed queries
    adv = AdversaryStrategy(
        {(): "0:_", **{(a,): "1:_" for a in "01"}, **{(a, x): "0:1" for a in "01" for x in "01"}}, 3
    )
    for b in (0, 1):
        v = view_dist(c, adv, b).as_dict()
        m0 = {(a0, a2): p for (a0, a2), p in view_dist(ms[0], AdversaryStrategy({(): "_", ("0",): "1", ("1",): "1"}, 2), b).items()}
        m1 = ms[1].response(b, (), "_").as_dict()
        for (a0, a1, a2), p in v.items():
            assert p == m0[(a0, a2)] * m1[a1]


def test_null_extended_schedule(rng):
    ms = [two_round(rand_params(rng)), two_round(rand_params(rng))]
    o = ordered_normal_form(ms)
    assert o.rounds == 2 * 4
    # free order: m0 first round, then m1 twice, then m0 second round with query 1
    policy = {(): "0:_"}
    for a in "01":
        policy[(a,)] = "1:_"
        for x in "01":
            policy[(a, x)] = "1:0"
            for y in "01":
                policy[(a, x, y)] = "0:1"
    free = AdversaryStrategy(policy, 4)
    ordered = translate_strategy(free, ms)
    first = ordered.policy[()]
    assert first == "1_"
    assert ordered.policy[("0",)] == "1_"
    assert ordered.policy[("0", "1")] == "0"
    for b in (0, 1):
        assert view_dist(o, ordered, b).map(strip_nulls) == view_dist(concomp(ms), free, b)


def _lemma2(ms, advs):
    c = tabulate(concomp(ms))
    target = tabulate(ordered_normal_form(ms))
    for adv in advs:
        translated = translate_strategy(adv, ms, target)
        for b in (0, 1):
            if view_dist(target, translated, b).map(strip_nulls) != view_dist(c, adv, b):
                return False
    return True


def test_lemma2_small_pairs_exhaustive(rng):
    for _ in range(6):
        ms = [rand_small_mechanism(rng), rand_small_mechanism(rng)]
        c = concomp(ms)
        if c.rounds == 4:
            continue
        assert _lemma2(ms, enumerate_adversaries(c))


def test_lemma2_two_round_pair_path_cover(rng):
    ms = [two_round(rand_params(rng)), two_round(rand_params(rng))]
    c = tabulate(concomp(ms))
    advs = [strategy_through(c, p) for p in leaf_paths(c)]
    assert _lemma2(ms, advs)


@pytest.mark.skipif(not os.environ.get("INTERDP_SLOW"), reason="set INTERDP_SLOW=1 (about 6 minutes)")
def test_lemma2_two_round_pair_exhaustive(rng):
    ms = [two_round(rand_params(rng)), two_round(rand_params(rng))]
    assert _lemma2(ms, enumerate_adversaries(concomp(ms)))


def test_strip_nulls():
    assert strip_nulls((BOTTOM, "0", BOTTOM, "1")) == ("0", "1")
