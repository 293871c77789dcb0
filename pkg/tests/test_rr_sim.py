from fractions import Fraction as F

import pytest

from helpers import rand_pure_two_round
from interdp.adversary import enumerate_adversaries, priv_loss, view_dist
from interdp.errors import InvariantViolation, NotDPError
from interdp.mechanism import TwoRoundParams, dumps_mechanism, loads_mechanism, rr_pure, two_round
from interdp.prob import FiniteDist
from interdp.rr_sim import (
    build_simulator,
    induced_mechanism,
    priv_loss_equivalence_check,
    rr_product_scale,
    verify_simulation,
)


@pytest.mark.parametrize("u", [F(3, 2), 2, 7])
def test_rr_simulator_is_identity(u):
    t = build_simulator(rr_pure(u), u)
    assert t.response(0, (), "_").as_dict() == {"0": 1, "1": 0}
    assert t.response(1, (), "_").as_dict() == {"0": 0, "1": 1}
    report = verify_simulation(rr_pure(u), t, u)
    assert report.passed and report.adversaries_checked == 1


def test_input_independent_special_case():
    m = two_round(TwoRoundParams.from_tuple([F(1, 3)] * 10))
    t = build_simulator(m, 1)
    assert t.branches[0] == m.branches[0] == t.branches[1]
    assert verify_simulation(m, t, 1).passed
    with pytest.raises(NotDPError):
        build_simulator(rr_pure(2), 1)
    with pytest.raises(InvariantViolation):
        build_simulator(rr_pure(2), F(1, 2))


def test_input_independent_any_scale():
    m = two_round(TwoRoundParams.from_tuple([F(1, 4)] * 10))
    t = build_simulator(m, 3)
    assert t.branches[0] == m.branches[0] == t.branches[1]


def test_random_two_round(rng):
    for _ in range(10):
        m, u = rand_pure_two_round(rng)
        if u == 1:
            continue
        t = build_simulator(m, u)
        for table in t.branches:
            for d in table.values():
                assert all(0 <= p <= 1 for p in d.probs)
        report = verify_simulation(m, t, u)
        assert report.passed and report.adversaries_checked == 4
        # cumulative laws follow (u P_c - P_other) / (u - 1)
        for adv in enumerate_adversaries(m):
            p0, p1 = view_dist(m, adv, 0).as_dict(), view_dist(m, adv, 1).as_dict()
            t0 = view_dist(t, adv, 0).as_dict()
            for y in p0:
                assert t0[y] == (u * p0[y] - p1[y]) / (u - 1)


def test_scale_above_privloss(rng):
    m, u = rand_pure_two_round(rng)
    t = build_simulator(m, u * 2)
    assert verify_simulation(m, t, u * 2).passed


def test_not_dp_names_transcript(rng):
    m, u = rand_pure_two_round(rng)
    while u <= F(11, 10):
        m, u = rand_pure_two_round(rng)
    with pytest.raises(NotDPError) as err:
        build_simulator(m, (1 + u) / 2)
    assert err.value.transcript
    assert all(len(step) == 2 for step in err.value.transcript)


def test_corrupted_entry_reported(rng):
    m, u = rand_pure_two_round(rng)
    while u == 1:
        m, u = rand_pure_two_round(rng)
    t = build_simulator(m, u)
    node = ((("_", "0"),), "1")
    good = t.branches[0][node].as_dict()
    shifted = {"0": (good["0"] + good["1"]) / 2, "1": (good["0"] + good["1"]) / 2}
    if shifted == good:
        shifted = {"0": F(1), "1": F(0)}
    t.branches[0][node] = FiniteDist.from_dict(shifted)
    report = verify_simulation(m, t, u)
    assert not report.passed
    v = report.violations[0]
    assert v["transcript"][0] == "0"
    assert F(v["actual"]) - F(v["expected"]) == F(v["discrepancy"]) != 0
    assert report.to_json()["status"] == "fail"


def test_simulator_serializes_with_rr_labels(rng):
    m, u = rand_pure_two_round(rng)
    doc = dumps_mechanism(build_simulator(m, max(u, 2)))
    assert '"rr0"' in doc and '"rr1"' in doc
    assert loads_mechanism(doc).input_labels == ("rr0", "rr1")


def test_simulator_of_simulator(rng):
    m, u = rand_pure_two_round(rng)
    u = max(u, F(3, 2))
    t = build_simulator(m, u)
    induced = induced_mechanism(t, u)
    for adv in enumerate_adversaries(m):
        for b in (0, 1):
            assert view_dist(induced, adv, b) == view_dist(m, adv, b)
    t2 = build_simulator(induced, u)
    assert verify_simulation(induced, t2, u).passed
    for adv in enumerate_adversaries(m):
        for c in (0, 1):
            assert view_dist(t2, adv, c) == view_dist(t, adv, c)


def test_equivalence_examples(rng):
    r = priv_loss_equivalence_check([rr_pure(2), rr_pure(3)], 0)
    assert r.left == r.right == 6
    flat = two_round(TwoRoundParams.from_tuple([F(1, 2)] * 10))
    r = priv_loss_equivalence_check([flat], F(1, 10))
    assert r.left == r.right == 1
    ms = [rand_pure_two_round(rng, den=8)[0] for _ in range(2)]
    r = priv_loss_equivalence_check(ms, F(1, 1000))
    assert r.sound
    assert r.to_json()["sound"] is True


def test_rr_product_scale_single():
    assert rr_product_scale([F(5)], 0) == 5
    assert rr_product_scale([F(5)], F(1, 6)) == 4
    assert priv_loss(rr_pure(5), F(1, 6)) == 4
