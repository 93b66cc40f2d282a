"""Multi-seed, multi-configuration experiments and their reports.

Throughout this module "cost" is the penalized objective (pairing cost
plus deadhead penalty), the quantity the GA minimizes; with a zero
penalty it is the plain pairing cost.
"""

from __future__ import annotations

import logging
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import io as cio
from .ga import VARIANTS, GaConfig, RunRecord, run
from .pairings import AllPairs, enumerate_pairings

log = logging.getLogger(__name__)

TRACE_HEADER = ["elapsed_sec", "generation", "best_cost_cents", "best_deadheads"]
SUMMARY_HEADER = ["config", "runs", "cost_mean_cents", "cost_std_cents", "cost_best_cents",
                  "cost_worst_cents", "deadheads_mean", "deadheads_std", "deadheads_best",
                  "deadheads_worst"]
GAP_HEADER = ["config", "best_cost_cents", "reference_cost_cents", "gap_pct"]


@dataclass(frozen=True)
class ExperimentPlan:
    """What to run.

    ``reference`` is ``"oracle"`` (exact solver), ``"greedy"``, a path to a
    solution JSON file, or an integer reference cost in cents.
    """

    schedule: str | None = None
    rules: str | None = None
    cost_model: str | None = None
    allpairs: str | None = None
    configurations: tuple[str, ...] = ("GA1", "GA2", "GA3", "GA4")
    seeds: tuple[float | int, ...] = (0,)
    budget_seconds: float | None = None
    budget_generations: int | None = None
    reference: str | int | None = "greedy"
    population_size: int = 24
    crossover_rate: float = 0.9
    mutation_rate_factor: float = 3.0
    dhd_penalty_cents: int = 0
    unexpressed_slots: int = 100

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ValueError("a plan needs at least one seed")
        if not self.configurations:
            raise ValueError("a plan needs at least one configuration")
        bad = [c for c in self.configurations if c not in VARIANTS]
        if bad:
            raise ValueError(f"unknown configurations {bad}; expected a subset of {sorted(VARIANTS)}")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        if self.allpairs is None and (self.schedule is None or self.rules is None):
            raise ValueError("a plan needs an AllPairs file or a schedule plus rules")
        # validates the budget and GA parameters
        self.ga_config(self.configurations[0], self.seeds[0])

    def ga_config(self, variant: str, seed: float | int) -> GaConfig:
        return GaConfig(variant=variant, population_size=self.population_size,
                        seconds=self.budget_seconds, generations=self.budget_generations,
                        crossover_rate=self.crossover_rate,
                        mutation_rate_factor=self.mutation_rate_factor,
                        dhd_penalty_cents=self.dhd_penalty_cents, seed=seed,
                        unexpressed_slots=self.unexpressed_slots)

    def to_dict(self) -> dict:
        return {
            "schedule": self.schedule, "rules": self.rules, "cost_model": self.cost_model,
            "allpairs": self.allpairs, "configurations": list(self.configurations),
            "seeds": list(self.seeds),
            "budget": {k: v for k, v in (("seconds", self.budget_seconds),
                                         ("generations", self.budget_generations)) if v is not None},
            "reference": self.reference, "population_size": self.population_size,
            "crossover_rate": self.crossover_rate, "mutation_rate_factor": self.mutation_rate_factor,
            "dhd_penalty_cents": self.dhd_penalty_cents, "unexpressed_slots": self.unexpressed_slots,
        }

    @classmethod
    def from_dict(cls, d: Mapping, base_dir: str | os.PathLike = ".") -> "ExperimentPlan":
        known = {"schedule", "rules", "cost_model", "allpairs", "configurations", "seeds", "budget",
                 "reference", "population_size", "crossover_rate", "mutation_rate_factor",
                 "dhd_penalty_cents", "unexpressed_slots"}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f"unknown plan keys {unknown}")
        budget = d.get("budget") or {}
        if not isinstance(budget, Mapping) or set(budget) - {"seconds", "generations"}:
            raise ValueError('budget must look like {"seconds": S} and/or {"generations": G}')

        def resolve(p):
            return None if p is None else str(Path(base_dir, p))

        ref = d.get("reference", "greedy")
        if isinstance(ref, str) and ref not in ("oracle", "greedy"):
            ref = resolve(ref)
        kw = {k: d[k] for k in ("population_size", "crossover_rate", "mutation_rate_factor",
                                "dhd_penalty_cents", "unexpressed_slots") if k in d}
        return cls(schedule=resolve(d.get("schedule")), rules=resolve(d.get("rules")),
                   cost_model=resolve(d.get("cost_model")), allpairs=resolve(d.get("allpairs")),
                   configurations=tuple(d.get("configurations", ("GA1", "GA2", "GA3", "GA4"))),
                   seeds=tuple(d.get("seeds", (0,))), budget_seconds=budget.get("seconds"),
                   budget_generations=budget.get("generations"), reference=ref, **kw)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ExperimentPlan":
        return cls.from_dict(cio.read_json(path), Path(path).parent)


@dataclass(frozen=True)
class RunFailure:
    config: str
    seed: float | int
    error: str


def load_allpairs(plan: ExperimentPlan, workers: int = 1) -> AllPairs:
    if plan.allpairs is not None:
        return cio.read_allpairs(plan.allpairs)[0]
    inst = cio.load_instance(plan.schedule, plan.rules, plan.cost_model)
    return enumerate_pairings(inst, workers=workers)


_shared: AllPairs | None = None


def _init_worker(allpairs: AllPairs) -> None:
    global _shared
    _shared = allpairs


def _run_one(cfg: GaConfig, allpairs: AllPairs | None = None):
    try:
        return run(allpairs if allpairs is not None else _shared, cfg)
    except Exception as exc:  # reported per run, siblings continue
        return RunFailure(cfg.variant, cfg.seed, f"{type(exc).__name__}: {exc}")


def _key(item) -> tuple:
    seed = item.seed
    return (item.config, isinstance(seed, float), seed)


def run_experiment(plan: ExperimentPlan, allpairs: AllPairs | None = None, *,
                   workers: int | None = None,
                   failures: list[RunFailure] | None = None) -> list[RunRecord]:
    """One record per (configuration, seed), sorted by that key.

    Runs are independent; with ``workers > 1`` they execute in separate
    processes. A failing run is logged and, if ``failures`` is given,
    appended there; the others still complete.
    """
    workers = workers or os.cpu_count() or 1
    if allpairs is None:
        allpairs = load_allpairs(plan, workers)
    configs = [plan.ga_config(v, s) for v in plan.configurations for s in plan.seeds]
    if workers > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(configs)),
                                 initializer=_init_worker, initargs=(allpairs,)) as pool:
            outcomes = list(pool.map(_run_one, configs))
    else:
        outcomes = [_run_one(c, allpairs) for c in configs]
    records = sorted((o for o in outcomes if isinstance(o, RunRecord)), key=_key)
    failed = sorted((o for o in outcomes if isinstance(o, RunFailure)), key=_key)
    for f in failed:
        log.warning("run %s seed=%s failed: %s", f.config, f.seed, f.error)
    if failures is not None:
        failures.extend(failed)
    return records


def round_half_up(value, places: int = 0) -> Decimal:
    q = Decimal(1).scaleb(-places)
    return Decimal(str(value)).quantize(q, rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class Stats:
    mean: float
    std: float
    best: int
    worst: int


def describe(values: Sequence[int]) -> Stats:
    """Mean, sample standard deviation (0 for a single value), min and max."""
    if not values:
        raise ValueError("no values")
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return Stats(mean, std, min(values), max(values))


@dataclass(frozen=True)
class SummaryRow:
    config: str
    runs: int
    cost: Stats
    deadheads: Stats

    def csv_row(self) -> list:
        c, d = self.cost, self.deadheads
        return [self.config, self.runs, int(round_half_up(c.mean)), int(round_half_up(c.std)),
                c.best, c.worst, str(round_half_up(d.mean, 2)), str(round_half_up(d.std, 2)),
                d.best, d.worst]


def summarize(records: Iterable[RunRecord]) -> list[SummaryRow]:
    """Per-configuration statistics of final cost and deadheads."""
    groups: dict[str, list[RunRecord]] = {}
    for r in records:
        groups.setdefault(r.config, []).append(r)
    rows = []
    for config in sorted(groups):
        # sort so float summation order does not depend on record order
        costs = sorted(r.fitness_cents for r in groups[config])
        dhds = sorted(r.deadheads for r in groups[config])
        rows.append(SummaryRow(config, len(costs), describe(costs), describe(dhds)))
    return rows


def summary_csv(rows: Sequence[SummaryRow], config: Mapping) -> str:
    return cio.csv_text(SUMMARY_HEADER, (r.csv_row() for r in rows), config)


def _usd(cents) -> str:
    return f"{round_half_up(Decimal(str(cents)) / 100, 2):,.2f}"


def summary_text(rows: Sequence[SummaryRow]) -> str:
    """Aligned human-readable table, money in USD."""
    table = [["config", "runs", "cost mean ± sd (USD)", "best", "worst", "deadheads mean ± sd",
              "best", "worst"]]
    for r in rows:
        c, d = r.cost, r.deadheads
        table.append([r.config, str(r.runs), f"{_usd(c.mean)} ± {_usd(c.std)}", _usd(c.best),
                      _usd(c.worst), f"{d.mean:.2f} ± {d.std:.2f}", str(d.best), str(d.worst)])
    widths = [max(len(row[i]) for row in table) for i in range(len(table[0]))]
    lines = ["  ".join(cell.rjust(w) if i else cell.ljust(w) for i, (cell, w) in enumerate(zip(row, widths)))
             for row in table]
    return "\n".join(lines) + "\n"


def gap_percent(best: int, reference: int) -> Decimal:
    """(best - reference) / reference * 100, rounded half-up to 2 decimals."""
    if reference <= 0:
        raise ValueError("reference cost must be positive")
    return (Decimal(best - reference) * 100 / Decimal(reference)).quantize(
        Decimal("0.01"), rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class GapRow:
    config: str
    best_cents: int
    reference_cents: int
    gap_pct: Decimal = field(compare=True)


def gap_report(records: Iterable[RunRecord] | Mapping[str, int], reference_cost: int) -> list[GapRow]:
    """Gap of each configuration's best cost to ``reference_cost``.

    ``records`` may also be a mapping from configuration to its best cost.
    """
    if reference_cost <= 0:
        raise ValueError("reference cost must be positive")
    if isinstance(records, Mapping):
        best = dict(records)
    else:
        best = {}
        for r in records:
            best[r.config] = min(best.get(r.config, r.fitness_cents), r.fitness_cents)
    return [GapRow(c, int(best[c]), int(reference_cost), gap_percent(int(best[c]), int(reference_cost)))
            for c in sorted(best)]


def gaps_csv(rows: Sequence[GapRow], config: Mapping) -> str:
    return cio.csv_text(GAP_HEADER, ([r.config, r.best_cents, r.reference_cents, f"{r.gap_pct:.2f}"]
                                     for r in rows), config)


def trace_csv(record: RunRecord, config: Mapping, *, timing: bool = True) -> str:
    rows = ([f"{p.elapsed_sec:.6f}" if timing else "", p.generation, p.best_cost_cents, p.best_deadheads]
            for p in record.trace)
    return cio.csv_text(TRACE_HEADER, rows, config)


def trace_name(record: RunRecord) -> str:
    return f"trace_{record.config}_{record.seed}.csv"


def resolve_reference(plan: ExperimentPlan, allpairs: AllPairs) -> int | None:
    """Reference cost in cents for the plan's ``reference`` setting."""
    from .oracle import solve_exact, solve_greedy

    ref = plan.reference
    if ref is None:
        return None
    if isinstance(ref, int) and not isinstance(ref, bool):
        return ref
    if ref == "oracle":
        return solve_exact(allpairs, plan.dhd_penalty_cents).objective_cents
    if ref == "greedy":
        return solve_greedy(allpairs, plan.dhd_penalty_cents).objective_cents
    data = cio.read_json(ref)
    if "objective_cents" in data:
        return int(data["objective_cents"])
    if "record" in data:
        return int(data["record"]["fitness_cents"])
    if "cost_cents" in data:
        return int(data["cost_cents"])
    raise cio.FormatError("no reference cost found", ref)
