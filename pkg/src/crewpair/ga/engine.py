"""Generational GA driver and its run record."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from ..pairings import AllPairs
from . import operators as ops
from .chromosome import Chromosome, FitnessConfig

log = logging.getLogger(__name__)

# operator set per configuration: (initializer, mutation, crossover)
VARIANTS = {
    "GA1": ("random", 1, 1),
    "GA2": ("dhd_min", 1, 1),
    "GA3": ("dhd_min", 2, 1),
    "GA4": ("dhd_min", 2, 2),
}


def seed_to_int(seed: float | int) -> int:
    """Map a seed to a non-negative integer.

    Floats in [0, 1) are scaled by 2**32 and truncated; integers pass
    through unchanged.
    """
    if isinstance(seed, bool):
        raise TypeError("seed must be a number")
    if isinstance(seed, float):
        if not 0.0 <= seed < 1.0:
            raise ValueError("float seeds must lie in [0, 1)")
        return int(seed * 2**32)
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ValueError("integer seeds must fit in 64 unsigned bits")
    return seed


@dataclass(frozen=True)
class GaConfig:
    variant: str = "GA4"
    population_size: int = 24
    seconds: float | None = None
    generations: int | None = None
    crossover_rate: float = 0.9
    mutation_rate_factor: float = 3.0
    dhd_penalty_cents: int = 0
    seed: float | int = 0
    unexpressed_slots: int = ops.DEFAULT_UNEXPRESSED_SLOTS

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown configuration {self.variant!r}; expected one of {sorted(VARIANTS)}")
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.seconds is None and self.generations is None:
            raise ValueError("set a termination budget: seconds and/or generations")
        if self.seconds is not None and self.seconds < 0:
            raise ValueError("seconds must be non-negative")
        if self.generations is not None and self.generations < 0:
            raise ValueError("generations must be non-negative")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("crossover_rate must lie in [0, 1]")
        if self.mutation_rate_factor < 0:
            raise ValueError("mutation_rate_factor must be non-negative")
        if self.dhd_penalty_cents < 0:
            raise ValueError("dhd_penalty_cents must be non-negative")
        if self.unexpressed_slots < 0:
            raise ValueError("unexpressed_slots must be non-negative")
        seed_to_int(self.seed)

    @property
    def operators(self) -> tuple[str, int, int]:
        return VARIANTS[self.variant]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["config"] = d.pop("variant")
        return d


@dataclass(frozen=True)
class TracePoint:
    elapsed_sec: float
    generation: int
    best_cost_cents: int
    best_deadheads: int


@dataclass(frozen=True)
class Snapshot:
    fitness_cents: int
    cost_cents: int
    deadheads: int
    num_pairings: int


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one GA run.

    ``fitness_cents`` is the penalized objective, ``cost_cents`` the raw
    pairing cost of the same solution. Trace points carry the best
    penalized objective under the ``best_cost_cents`` name.
    """

    config: str
    seed: float | int
    fitness_cents: int
    cost_cents: int
    deadheads: int
    num_pairings: int
    selection: tuple[int, ...]
    generations: int
    early: Snapshot
    trace: tuple[TracePoint, ...] = field(repr=False)

    def to_dict(self, *, timing: bool = True) -> dict:
        d = asdict(self)
        d["selection"] = list(self.selection)
        if not timing:
            for point in d["trace"]:
                point.pop("elapsed_sec")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        trace = tuple(TracePoint(p.get("elapsed_sec", 0.0), p["generation"], p["best_cost_cents"],
                                 p["best_deadheads"]) for p in d.get("trace", ()))
        return cls(
            config=d["config"], seed=d["seed"], fitness_cents=d["fitness_cents"],
            cost_cents=d["cost_cents"], deadheads=d["deadheads"], num_pairings=d["num_pairings"],
            selection=tuple(d["selection"]), generations=d.get("generations", 0),
            early=Snapshot(**d["early"]), trace=trace,
        )

    def deterministic_view(self) -> dict:
        """Everything except wall-clock timings."""
        return self.to_dict(timing=False)


def _snapshot(c: Chromosome) -> Snapshot:
    return Snapshot(c.fitness, c.cost, c.deadheads, int(len(c.active())))


def _best(pop: list[Chromosome]) -> Chromosome:
    return min(enumerate(pop), key=lambda t: (t[1].fitness, t[0]))[1]


def run(allpairs: AllPairs, cfg: GaConfig, rng: np.random.Generator | None = None, *,
        workers: int = 1, clock: Callable[[], float] = time.perf_counter,
        on_generation: Callable[[TracePoint], None] | None = None) -> RunRecord:
    """Evolve a population until the budget is spent.

    Parameters
    ----------
    allpairs : AllPairs
        Must cover every flight.
    cfg : GaConfig
        Operator configuration and budget. The wall-clock budget is
        checked only between generations.
    rng : numpy.random.Generator, optional
        Defaults to a PCG64 stream seeded from ``cfg.seed``.
    workers : int
        Threads used to repair and evaluate children. Results do not depend
        on it.
    """
    if rng is None:
        rng = np.random.default_rng(seed_to_int(cfg.seed))
    allpairs.require_coverable()
    fit_cfg = FitnessConfig(cfg.dhd_penalty_cents)
    init, mutation, crossover = cfg.operators
    t0 = clock()

    if init == "random":
        pop = ops.random_initialize(allpairs, cfg.population_size, rng,
                                    unexpressed_slots=cfg.unexpressed_slots)
    else:
        pop = ops.dhd_min_initialize(allpairs, cfg.population_size, rng,
                                     unexpressed_slots=cfg.unexpressed_slots)
        pop = [ops.repair(c, allpairs) for c in pop]
    for c in pop:
        ops.evaluate(c, allpairs, fit_cfg)

    length = len(pop[0])
    rate = min(1.0, cfg.mutation_rate_factor / length) if length else 0.0
    best = _best(pop)
    early = _snapshot(best)
    trace = [TracePoint(clock() - t0, 0, best.fitness, best.deadheads)]
    if on_generation:
        on_generation(trace[-1])

    def finish(c: Chromosome) -> Chromosome:
        c = ops.repair(c, allpairs)
        ops.evaluate(c, allpairs, fit_cfg)
        return c

    n = len(pop)
    generation = 0
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while True:
            if cfg.generations is not None and generation >= cfg.generations:
                break
            if cfg.seconds is not None and clock() - t0 >= cfg.seconds:
                break
            fittest = _best(pop)
            fitness = [c.fitness for c in pop]
            raw: list[Chromosome] = []
            while len(raw) < n:
                i, j = ops.tournament_indices(fitness, rng)
                p1, p2 = pop[i], pop[j]
                if rng.random() < cfg.crossover_rate:
                    if crossover == 1:
                        c1, c2 = ops.crossover1_fusion(p1, p2, rng)
                    else:
                        c1, c2 = ops.crossover2_dhd_min(p1, p2, allpairs, rng)
                else:
                    c1, c2 = (Chromosome(p.pairings, p.selected, p.expressed_len) for p in (p1, p2))
                for child in (c1, c2):
                    if mutation == 1:
                        child = ops.mutation1_bitflip(child, rate, rng)
                    else:
                        child = ops.mutation2_density(child, rate, fittest, rng)
                    raw.append(child)
            raw = raw[:n]
            children = list(pool.map(finish, raw)) if pool else [finish(c) for c in raw]
            pop = ops.replace_generational(pop, children)
            generation += 1
            best = pop[0]
            trace.append(TracePoint(clock() - t0, generation, best.fitness, best.deadheads))
            if on_generation:
                on_generation(trace[-1])
    finally:
        if pool:
            pool.shutdown()

    best = _best(pop)
    log.debug("%s seed=%s: %d generations, fitness %d", cfg.variant, cfg.seed, generation, best.fitness)
    return RunRecord(
        config=cfg.variant,
        seed=cfg.seed,
        fitness_cents=best.fitness,
        cost_cents=best.cost,
        deadheads=best.deadheads,
        num_pairings=int(len(best.active())),
        selection=tuple(sorted(int(p) for p in best.active())),
        generations=generation,
        early=early,
        trace=tuple(trace),
    )
