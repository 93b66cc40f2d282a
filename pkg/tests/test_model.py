import itertools

import numpy as np
import pytest

from crewpair.model import (CostModel, Duty, Flight, Instance, InstanceError, LegalityRules,
                            deadhead_count, make_pairing, pairing_cost)

T = 28_401_120


def leg(i, o, d, dep, arr):
    return Flight(i, o, d, T + dep, T + arr)


def test_flight_rejects_bad_times_and_loops():
    with pytest.raises(InstanceError):
        leg(0, "DAL", "HOU", 60, 60)
    with pytest.raises(InstanceError):
        leg(0, "DAL", "DAL", 0, 60)
    assert leg(0, "DAL", "HOU", 0, 75).block_minutes == 75


def test_rules_validation():
    with pytest.raises(InstanceError):
        LegalityRules(min_sit=240, max_sit=240)
    with pytest.raises(InstanceError):
        LegalityRules(min_rest=0)
    with pytest.raises(InstanceError):
        LegalityRules(max_sit=1.5)
    with pytest.raises(InstanceError):
        CostModel(hotel_night=-1)


def test_default_rules_values():
    r = LegalityRules()
    assert (r.min_sit, r.max_sit, r.max_duty_flying, r.max_duty_span, r.min_rest,
            r.max_duties_per_pairing, r.max_pairing_days) == (30, 240, 480, 720, 540, 4, 5)
    assert r.max_layover == 36 * 60


def test_instance_invariants():
    f = (leg(0, "DAL", "HOU", 0, 60),)
    with pytest.raises(InstanceError):
        Instance(f, (), LegalityRules(), CostModel())
    with pytest.raises(InstanceError):
        Instance(f, ("AUS",), LegalityRules(), CostModel())
    with pytest.raises(InstanceError):
        Instance((leg(1, "DAL", "HOU", 0, 60),), ("DAL",), LegalityRules(), CostModel())
    inst = Instance((leg(1, "HOU", "DAL", 120, 180), leg(0, "DAL", "HOU", 0, 60)), ("DAL",),
                    LegalityRules(), CostModel())
    assert [f.id for f in inst.flights] == [0, 1]


@pytest.mark.parametrize("counts,expected", [([1, 1, 1, 1], 0), ([1, 1, 2, 3], 3), ([], 0), ([5], 4)])
def test_deadhead_count(counts, expected):
    assert deadhead_count(counts) == expected


def test_deadhead_count_is_order_free():
    rng = np.random.default_rng(0)
    for _ in range(50):
        c = rng.integers(1, 5, size=10).tolist()
        assert deadhead_count(c) == deadhead_count(sorted(c)) == sum(c) - len(c)


def _duty(flying, rules):
    # one synthetic leg carrying all the flying minutes
    return Duty((0,), rules.briefing, rules.debriefing, "DAL", "DAL", 0, flying, flying)


def test_pairing_cost_examples():
    rules = LegalityRules()
    m = CostModel(per_flying_minute=2, per_duty_fixed=100, hotel_night=0, pairing_guarantee_minimum=0)
    assert pairing_cost([_duty(120, rules)], m) == 340
    m = CostModel(per_flying_minute=2, per_duty_fixed=100, hotel_night=50, pairing_guarantee_minimum=500)
    assert pairing_cost([_duty(0, rules), _duty(0, rules)], m) == 500


def test_pairing_cost_matches_formula_on_random_duties():
    rng = np.random.default_rng(1)
    rules = LegalityRules()
    for _ in range(200):
        m = CostModel(*(int(x) for x in rng.integers(0, 30_000, size=4)))
        flying = rng.integers(0, 480, size=int(rng.integers(1, 5))).tolist()
        duties = [_duty(f, rules) for f in flying]
        n = len(flying)
        expected = max(m.pairing_guarantee_minimum,
                       m.per_flying_minute * sum(flying) + m.per_duty_fixed * n + m.hotel_night * (n - 1))
        assert pairing_cost(duties, m) == expected


def test_duty_build_and_pairing_fields():
    rules = LegalityRules()
    a, b = leg(0, "DAL", "HOU", 0, 60), leg(1, "HOU", "DAL", 120, 200)
    d = Duty.build([a, b], rules)
    assert d.flights == (0, 1)
    assert d.start == a.departure - 45 and d.end == b.arrival + 30
    assert d.span == 200 + 75 and d.flying_minutes == 140
    p = make_pairing(7, [d], "DAL", CostModel())
    assert p.flight_ids == (0, 1) and p.duty_bounds == (2,)
    assert p.coverage == frozenset({0, 1}) and len(p.coverage) == sum(len(x.flights) for x in p.duties)
    assert p.cost == max(60_000, 100 * 140 + 20_000)
    with pytest.raises(InstanceError):
        Duty.build([], rules)


def test_types_are_immutable():
    f = leg(0, "DAL", "HOU", 0, 60)
    with pytest.raises(AttributeError):
        f.id = 3
    with pytest.raises(AttributeError):
        LegalityRules().min_sit = 1
