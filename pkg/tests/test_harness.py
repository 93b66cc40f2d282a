import json
import math
from decimal import Decimal
from fractions import Fraction

import numpy as np
import pytest

from crewpair import io as cio
from crewpair.ga.engine import GaConfig, RunRecord, Snapshot, TracePoint, run
from crewpair.harness import (ExperimentPlan, RunFailure, describe, gap_percent, gap_report, gaps_csv,
                              resolve_reference, run_experiment, summarize, summary_csv, summary_text,
                              trace_csv, trace_name)

# ten final costs whose mean, sample sd, best and worst are 2649823, 57559,
# 2494649 and 2710084 cents
TEN_COSTS = [2494649, 2643679, 2650165, 2655926, 2661688, 2661687, 2667448, 2673209, 2679695, 2710084]
PUBLISHED_BEST = {"GA1": 964858, "GA2": 957833, "GA3": 949592, "GA4": 987639}
PUBLISHED_GAPS = {"GA1": "13.47", "GA2": "12.65", "GA3": "11.68", "GA4": "16.15"}


def record(config, seed, cost, dh=0):
    snap = Snapshot(cost, cost, dh, 1)
    return RunRecord(config, seed, cost, cost, dh, 1, (0,), 0, snap, (TracePoint(0.0, 0, cost, dh),))


def hand_stats(values):
    n = len(values)
    mean = Fraction(sum(values), n)
    var = sum((Fraction(v) - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def test_gap_examples():
    for config, best in PUBLISHED_BEST.items():
        assert gap_percent(best, 850303) == Decimal(PUBLISHED_GAPS[config])
    assert gap_percent(850303, 850303) == 0
    assert gap_percent(800000, 1000000) == Decimal("-20.00")
    # half-up at the second decimal: 1/8 % = 0.125 -> 0.13
    assert gap_percent(100125, 100000) == Decimal("0.13")
    for bad in (0, -5):
        with pytest.raises(ValueError):
            gap_percent(1, bad)
        with pytest.raises(ValueError):
            gap_report({"GA1": 1}, bad)


def test_gap_report_from_records_uses_best_run():
    recs = [record("GA1", s, c) for s, c in enumerate((970000, 964858, 999999))]
    recs += [record("GA3", 0, 949592)]
    rows = gap_report(recs, 850303)
    assert [(r.config, r.best_cents, str(r.gap_pct)) for r in rows] == [
        ("GA1", 964858, "13.47"), ("GA3", 949592, "11.68")]


def test_gaps_csv_format():
    text = gaps_csv(gap_report(PUBLISHED_BEST, 850303), {"x": 1})
    lines = text.splitlines()
    assert lines[0].startswith("# crewpair ")
    assert lines[1] == "config,best_cost_cents,reference_cost_cents,gap_pct"
    assert lines[2:] == [f"{c},{b},850303,{PUBLISHED_GAPS[c]}" for c, b in sorted(PUBLISHED_BEST.items())]


def test_describe_matches_hand_computation():
    mean, sd = hand_stats(TEN_COSTS)
    assert mean == 2649823
    assert abs(sd - 57559) <= 0.5
    s = describe(TEN_COSTS)
    assert s.mean == 2649823 and abs(s.std - sd) < 1e-6
    assert (s.best, s.worst) == (2494649, 2710084)


def test_summary_row_integer_cents():
    recs = [record("GA1", i, c, dh=i % 3) for i, c in enumerate(TEN_COSTS)]
    (row,) = summarize(recs)
    out = row.csv_row()
    assert out[:6] == ["GA1", 10, 2649823, 57559, 2494649, 2710084]
    dh = [i % 3 for i in range(10)]
    m, sd = hand_stats(dh)
    assert Decimal(out[6]) == Decimal(float(m)).quantize(Decimal("0.01"))
    assert abs(float(out[7]) - sd) <= 0.005
    assert out[8:] == [0, 2]


def test_single_record_has_zero_sd():
    (row,) = summarize([record("GA2", 0, 123456, 4)])
    assert row.cost.std == 0 and row.cost.mean == row.cost.best == row.cost.worst == 123456
    assert row.deadheads.std == 0


def test_summary_is_permutation_invariant():
    rng = np.random.default_rng(0)
    recs = [record(f"GA{1 + i % 4}", i, int(rng.integers(10**6, 3 * 10**6)), int(rng.integers(0, 9)))
            for i in range(40)]
    expected = summary_csv(summarize(recs), {})
    for _ in range(20):
        shuffled = [recs[i] for i in rng.permutation(len(recs))]
        assert summary_csv(summarize(shuffled), {}) == expected


def test_summary_matches_independent_recompute(small_allpairs):
    recs = [run(small_allpairs[1], GaConfig(v, generations=3, seed=s, dhd_penalty_cents=250))
            for v in ("GA1", "GA4") for s in range(4)]
    for row in summarize(recs):
        costs = [r.fitness_cents for r in recs if r.config == row.config]
        mean, sd = hand_stats(costs)
        assert row.csv_row()[2] == math.floor(mean + Fraction(1, 2))
        assert abs(row.cost.std - sd) < 1e-6
        assert (row.cost.best, row.cost.worst) == (min(costs), max(costs))


def test_summary_text_in_dollars():
    text = summary_text(summarize([record("GA1", i, c) for i, c in enumerate(TEN_COSTS)]))
    assert "26,498.23 ± 575.59" in text
    assert "24,946.49" in text and "27,100.84" in text


def test_trace_csv_and_name():
    rec = record("GA4", 0.5, 777, 2)
    assert trace_name(rec) == "trace_GA4_0.5.csv"
    lines = trace_csv(rec, {}).splitlines()
    assert lines[1] == "elapsed_sec,generation,best_cost_cents,best_deadheads"
    assert lines[2] == "0.000000,0,777,2"
    assert trace_csv(rec, {}, timing=False).splitlines()[2] == ",0,777,2"


def _plan(tmp_path, ap_inst, **kw):
    ap, inst = ap_inst
    path = tmp_path / "pool.jsonl"
    path.write_text(cio.allpairs_lines(ap, inst))
    return ExperimentPlan(allpairs=str(path), **kw)


@pytest.fixture
def small_pool():
    from crewpair.oracle import SyntheticSpec, generate_instance
    from crewpair.pairings import enumerate_pairings
    inst = generate_instance(SyntheticSpec(10, num_airports=3, seed=2))
    return enumerate_pairings(inst), inst


def test_experiment_shape_and_determinism(tmp_path, small_pool):
    plan = _plan(tmp_path, small_pool, configurations=("GA4", "GA1"), seeds=(2, 0.5, 1),
                 budget_generations=3)
    a = run_experiment(plan, workers=1)
    assert len(a) == 6
    assert [(r.config, r.seed) for r in a] == [("GA1", 1), ("GA1", 2), ("GA1", 0.5),
                                               ("GA4", 1), ("GA4", 2), ("GA4", 0.5)]
    b = run_experiment(plan, workers=2)
    assert [r.deterministic_view() for r in a] == [r.deterministic_view() for r in b]


def test_initial_deadheads_lower_with_dhd_init(bench_allpairs):
    plan = ExperimentPlan(allpairs="unused", configurations=("GA1", "GA2"), seeds=tuple(range(5)),
                          budget_generations=0)
    recs = run_experiment(plan, bench_allpairs, workers=1)
    mean = {c: np.mean([r.early.deadheads for r in recs if r.config == c]) for c in ("GA1", "GA2")}
    assert mean["GA2"] < mean["GA1"]


def test_failures_are_captured_without_aborting(tmp_path, monkeypatch, small_pool):
    import crewpair.harness as H
    real = H.run

    def flaky(allpairs, cfg):
        if cfg.seed == 1:
            raise RuntimeError("boom")
        return real(allpairs, cfg)

    monkeypatch.setattr(H, "run", flaky)
    plan = _plan(tmp_path, small_pool, configurations=("GA2",), seeds=(0, 1, 2), budget_generations=1)
    failures: list[RunFailure] = []
    recs = run_experiment(plan, workers=1, failures=failures)
    assert [r.seed for r in recs] == [0, 2]
    assert failures == [RunFailure("GA2", 1, "RuntimeError: boom")]


def test_plan_validation():
    with pytest.raises(ValueError):
        ExperimentPlan(allpairs="x", seeds=(), budget_generations=1)
    with pytest.raises(ValueError):
        ExperimentPlan(allpairs="x", configurations=("GA9",), budget_generations=1)
    with pytest.raises(ValueError):
        ExperimentPlan(allpairs="x", seeds=(1, 1), budget_generations=1)
    with pytest.raises(ValueError):
        ExperimentPlan(budget_generations=1)
    with pytest.raises(ValueError):
        ExperimentPlan(allpairs="x")
    with pytest.raises(ValueError):
        ExperimentPlan.from_dict({"allpairs": "x", "budget": {"generations": 1}, "typo": 1})
    with pytest.raises(ValueError):
        ExperimentPlan.from_dict({"allpairs": "x", "budget": {"minutes": 1}})


def test_plan_file_round_trip(tmp_path):
    plan = ExperimentPlan(allpairs=str(tmp_path / "a.jsonl"), configurations=("GA3",), seeds=(0.25, 7),
                          budget_seconds=2.5, budget_generations=9, reference=850303)
    path = tmp_path / "plan.json"
    path.write_text(json.dumps(plan.to_dict()))
    assert ExperimentPlan.load(path) == plan
    rel = ExperimentPlan.from_dict({"allpairs": "a.jsonl", "budget": {"generations": 1},
                                    "reference": "best.json"}, tmp_path)
    assert rel.allpairs == str(tmp_path / "a.jsonl") and rel.reference == str(tmp_path / "best.json")


def test_resolve_reference(tmp_path, small_pool):
    from crewpair.oracle import solve_exact, solve_greedy
    ap, _ = small_pool
    base = dict(allpairs="x", budget_generations=1, dhd_penalty_cents=500)
    assert resolve_reference(ExperimentPlan(reference=None, **base), ap) is None
    assert resolve_reference(ExperimentPlan(reference=850303, **base), ap) == 850303
    assert resolve_reference(ExperimentPlan(reference="oracle", **base), ap) == solve_exact(ap, 500).objective_cents
    assert resolve_reference(ExperimentPlan(reference="greedy", **base), ap) == solve_greedy(ap, 500).objective_cents
    sol = tmp_path / "sol.json"
    sol.write_text(json.dumps({"fitness_cents": 1, "cost_cents": 4242}))
    assert resolve_reference(ExperimentPlan(reference=str(sol), **base), ap) == 4242
    sol.write_text("{}")
    with pytest.raises(cio.FormatError):
        resolve_reference(ExperimentPlan(reference=str(sol), **base), ap)
