"""Genetic operators for the set-covering chromosome.

Randomness comes only from the ``numpy.random.Generator`` passed in, and
each operator draws a fixed amount per call, so a seed pins the whole run.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import kernels as K
from ..pairings import AllPairs, UncoverableFlightsError
from .chromosome import (
    Chromosome,
    ChromosomeCapacityError,
    FitnessConfig,
    InfeasibleChromosomeError,
)

DEFAULT_UNEXPRESSED_SLOTS = 100
# search budget for the exact-partition step of crossover2
EXACT_COVER_NODES = 100_000


def _counts(allpairs: AllPairs, active: np.ndarray) -> np.ndarray:
    return K.coverage_counts(allpairs.pair_indptr, allpairs.pair_flights,
                             np.ascontiguousarray(active, dtype=np.int32), allpairs.num_flights)


def _all_ids(allpairs: AllPairs) -> np.ndarray:
    return np.arange(len(allpairs), dtype=np.int32)


def _draw_without_replacement(rng: np.random.Generator, pool: np.ndarray, k: int,
                              total: int) -> np.ndarray:
    """``k`` ids from ``pool`` without replacement, then from fresh
    permutations of all ``total`` ids if the pool runs dry."""
    parts = [rng.permutation(pool)[:k]] if len(pool) else []
    got = len(parts[0]) if parts else 0
    while got < k:
        extra = rng.permutation(total)[: k - got]
        parts.append(extra)
        got += len(extra)
    if not parts:
        return np.empty(0, dtype=np.int32)
    return np.concatenate(parts).astype(np.int32)


def _compact_redundant(allpairs: AllPairs, picks: np.ndarray, counts: np.ndarray) -> np.ndarray:
    keep = K.drop_redundant(counts, allpairs.pair_indptr, allpairs.pair_flights, picks)
    return picks[keep.astype(bool)]


def _dhd_min_cover(allpairs: AllPairs, pool: np.ndarray, rng: np.random.Generator,
                   counts: np.ndarray, order: np.ndarray | None = None) -> np.ndarray:
    """Zero-deadhead random pick from ``pool``, then fewest-added-deadhead greedy."""
    if order is None:
        order = rng.permutation(pool).astype(np.int32)
    first = K.zero_deadhead_scan(counts, allpairs.pair_indptr, allpairs.pair_flights, order)
    if (counts == 0).any():
        rest = K.min_deadhead_fill(counts, allpairs.costs, allpairs.pair_indptr,
                                   allpairs.pair_flights, pool)
        return np.concatenate([first, rest]).astype(np.int32)
    return first


def dhd_min_initialize(allpairs: AllPairs, pop_size: int, rng: np.random.Generator, *,
                       unexpressed_slots: int = DEFAULT_UNEXPRESSED_SLOTS) -> list[Chromosome]:
    """Deadhead-minimizing initial population.

    Each expressed part picks pairings that add no deadheads, uniformly at
    random among those still compatible, until none is left; the remaining
    flights are closed greedily by fewest added deadheads (then cost, then
    id). Chromosome length is ``unexpressed_slots`` plus the longest
    expressed part; the unexpressed tail is drawn from AllPairs without
    replacement with the participation bit cleared.
    """
    allpairs.require_coverable()
    pool = _all_ids(allpairs)
    covers = []
    for _ in range(pop_size):
        counts = np.zeros(allpairs.num_flights, dtype=np.int32)
        picks = _dhd_min_cover(allpairs, pool, rng, counts)
        covers.append(_compact_redundant(allpairs, picks, counts))
    length = unexpressed_slots + max((len(c) for c in covers), default=0)
    population = []
    for cover in covers:
        rest = np.setdiff1d(pool, cover, assume_unique=False).astype(np.int32)
        tail = _draw_without_replacement(rng, rest, length - len(cover), len(allpairs))
        genes = np.concatenate([cover, tail])
        selected = np.zeros(length, dtype=bool)
        selected[:len(cover)] = True
        population.append(Chromosome(genes, selected, len(cover)))
    return population


def random_initialize(allpairs: AllPairs, pop_size: int, rng: np.random.Generator, *,
                      unexpressed_slots: int = DEFAULT_UNEXPRESSED_SLOTS,
                      repaired: bool = True) -> list[Chromosome]:
    """Uniformly random genes, repaired to feasibility.

    ``F`` expressed genes (F = flight count, the size bound of any 1-minimal
    cover) plus ``unexpressed_slots`` more; every participation bit is a fair
    coin.
    """
    allpairs.require_coverable()
    n_expr = allpairs.num_flights
    length = unexpressed_slots + n_expr
    population = []
    for _ in range(pop_size):
        genes = _draw_without_replacement(rng, _all_ids(allpairs), length, len(allpairs))
        selected = rng.random(length) < 0.5
        population.append(Chromosome(genes, selected, n_expr))
    if repaired:
        population = [repair(c, allpairs) for c in population]
    return population


def tournament_indices(fitness: Sequence[int], rng: np.random.Generator) -> tuple[int, int]:
    """Two binary tournaments; lower fitness wins, ties go to the lower index."""
    n = len(fitness)
    winners = []
    for _ in range(2):
        if n == 1:
            a = b = 0
        else:
            a, b = (int(x) for x in rng.choice(n, size=2, replace=False))
        a, b = min(a, b), max(a, b)
        winners.append(b if fitness[b] < fitness[a] else a)
    return winners[0], winners[1]


def tournament_select(pop: Sequence[Chromosome], rng: np.random.Generator) -> tuple[Chromosome, Chromosome]:
    i, j = tournament_indices([c.fitness for c in pop], rng)
    return pop[i], pop[j]


def crossover1_fusion(p1: Chromosome, p2: Chromosome,
                      rng: np.random.Generator) -> tuple[Chromosome, Chromosome]:
    """Fitness-weighted per-gene inheritance (fusion crossover).

    Where parents differ, a child takes ``p1``'s whole gene with probability
    ``f2 / (f1 + f2)``; the two children are independent draws. A child
    keeps the expressed length of whichever parent supplied more of the
    differing genes inside the longer expressed region (ties go to ``p1``).
    """
    if len(p1) != len(p2):
        raise ValueError("parents must have equal length")
    f1, f2 = p1.fitness, p2.fitness
    if f1 is None or f2 is None:
        raise ValueError("parents must be evaluated")
    prob_p1 = f2 / (f1 + f2) if f1 + f2 > 0 else 0.5
    differ = (p1.pairings != p2.pairings) | (p1.selected != p2.selected)
    span = np.arange(len(p1)) < max(p1.expressed_len, p2.expressed_len)
    counted = differ & span
    children = []
    for _ in range(2):
        take1 = rng.random(len(p1)) < prob_p1
        genes = np.where(take1, p1.pairings, p2.pairings)
        bits = np.where(take1, p1.selected, p2.selected)
        from1 = int(np.count_nonzero(take1 & counted))
        from2 = int(np.count_nonzero(~take1 & counted))
        e = p1.expressed_len if from1 >= from2 else p2.expressed_len
        children.append(Chromosome(genes, bits, e))
    return children[0], children[1]


def crossover2_dhd_min(p1: Chromosome, p2: Chromosome, allpairs: AllPairs,
                       rng: np.random.Generator) -> tuple[Chromosome, Chromosome]:
    """Deadhead-minimizing crossover over the parents' combined pairings.

    Each child's expressed part is a zero-deadhead cover (exact partition)
    drawn from the union of both parents' genes: a depth-first search over
    a random ordering of the pool returns the first partition it meets.
    When the pool holds none (or the search hits ``EXACT_COVER_NODES``),
    the child is built like the initializer on the pool: random
    zero-deadhead picks closed by the fewest-deadhead greedy and, if the
    pool cannot cover every flight, by quality index repair over AllPairs.
    The unexpressed part takes the remaining pooled pairings most
    dissimilar to the expressed part.
    """
    if len(p1) != len(p2):
        raise ValueError("parents must have equal length")
    length = len(p1)
    combined = np.unique(np.concatenate([p1.pairings, p2.pairings])).astype(np.int32)
    children = []
    for _ in range(2):
        order = rng.permutation(combined).astype(np.int32)
        picks, status = K.exact_cover(order, allpairs.pair_indptr, allpairs.pair_flights,
                                      allpairs.num_flights, EXACT_COVER_NODES)
        if status == 1:
            counts = _counts(allpairs, picks)
        else:
            counts = np.zeros(allpairs.num_flights, dtype=np.int32)
            picks = _dhd_min_cover(allpairs, combined, rng, counts, order)
        if (counts == 0).any():
            extra = K.repair_cover(counts, allpairs.costs, allpairs.pair_indptr, allpairs.pair_flights,
                                   allpairs.flight_indptr, allpairs.flight_pairs)
            picks = np.concatenate([picks, extra]).astype(np.int32)
            if (counts == 0).any():
                raise UncoverableFlightsError(np.flatnonzero(counts == 0).tolist(), allpairs)
        if len(picks) > length:
            picks = _compact_redundant(allpairs, picks, counts)
            if len(picks) > length:
                raise ChromosomeCapacityError(f"cover of {len(picks)} pairings exceeds length {length}")
        pool = np.setdiff1d(combined, picks).astype(np.int32)
        # nearest-neighbour symmetric difference to the expressed pairings
        dis = K.nearest_symdiff(pool, picks, allpairs.pair_indptr, allpairs.pair_flights,
                                allpairs.num_flights)
        order = np.lexsort((pool, -dis))
        tail = pool[order][: length - len(picks)]
        if len(tail) < length - len(picks):
            used = np.concatenate([picks, tail])
            rest = np.setdiff1d(_all_ids(allpairs), used).astype(np.int32)
            tail = np.concatenate([tail, _draw_without_replacement(
                rng, rest, length - len(picks) - len(tail), len(allpairs))])
        genes = np.concatenate([picks, tail])
        selected = np.zeros(length, dtype=bool)
        selected[:len(picks)] = True
        children.append(Chromosome(genes, selected, len(picks)))
    return children[0], children[1]


def mutation1_bitflip(c: Chromosome, rate: float, rng: np.random.Generator) -> Chromosome:
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must lie in [0, 1]")
    flip = rng.random(len(c)) < rate
    return Chromosome(c.pairings, c.selected ^ flip, c.expressed_len)


def mutation2_density(c: Chromosome, rate: float, fittest: Chromosome,
                      rng: np.random.Generator) -> Chromosome:
    """Density-driven mutation.

    A selected gene is set to 1 with probability ``d`` (the share of set
    participation bits in ``fittest``), otherwise to 0. Equivalently: a 0
    becomes 1 with probability ``d``, a 1 becomes 0 with probability
    ``1 - d``.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must lie in [0, 1]")
    density = float(np.mean(fittest.selected)) if len(fittest) else 0.0
    chosen = rng.random(len(c)) < rate
    draw = rng.random(len(c)) < density
    bits = np.where(chosen, draw, c.selected)
    return Chromosome(c.pairings, bits, c.expressed_len)


def _place(pairs: np.ndarray, sel: np.ndarray, e: int, picks: np.ndarray, before: np.ndarray,
           counts: np.ndarray, allpairs: AllPairs) -> int:
    """Activate each picked pairing inside the fixed-length gene arrays."""
    length = len(pairs)
    qi_cache: dict[int, float] = {}

    def qi(p: int) -> float:
        if p not in qi_cache:
            new = int(np.count_nonzero(before[allpairs.flights_of(p)] == 0))
            qi_cache[p] = allpairs.costs[p] / new if new else float("inf")
        return qi_cache[p]

    for p in picks.tolist():
        hit = np.flatnonzero((pairs[:e] == p) & ~sel[:e])
        if len(hit):
            sel[hit[0]] = True
            continue
        if e < length:
            later = np.flatnonzero(pairs[e:] == p)
            if len(later):
                k = e + int(later[0])
                pairs[k], sel[k] = pairs[e], sel[e]
            pairs[e] = p
            sel[e] = True
            e += 1
            continue
        idle = np.flatnonzero(~sel[:e])
        if not len(idle):
            act = np.flatnonzero(sel[:e])
            keep = K.drop_redundant(counts, allpairs.pair_indptr, allpairs.pair_flights,
                                    np.ascontiguousarray(pairs[act]))
            sel[act[keep == 0]] = False
            idle = np.flatnonzero(~sel[:e])
            if not len(idle):
                raise ChromosomeCapacityError("no gene slot left to activate a repair pairing")
        worst = max(idle.tolist(), key=lambda k: (qi(int(pairs[k])), -k))
        pairs[worst] = p
        sel[worst] = True
    return e


def repair(c: Chromosome, allpairs: AllPairs, *, remove_redundant: bool = True) -> Chromosome:
    """Restore coverage with the quality-index heuristic.

    Each uncovered flight, in id order, gets the covering pairing with the
    lowest cost per still-uncovered flight (ties: cheaper, then lower id).
    A chosen pairing is switched on in place if the expressed part already
    holds it; otherwise it takes the first unexpressed slot and the
    expressed part grows by one. With no unexpressed slot left, the idle
    expressed gene with the worst quality index is overwritten.
    Redundant-pairing removal runs last.
    """
    pairs = c.pairings.copy()
    sel = c.selected.copy()
    e = c.expressed_len
    counts = _counts(allpairs, pairs[:e][sel[:e]])
    if (counts == 0).any():
        before = counts.copy()
        picks = K.repair_cover(counts, allpairs.costs, allpairs.pair_indptr, allpairs.pair_flights,
                               allpairs.flight_indptr, allpairs.flight_pairs)
        if (counts == 0).any():
            raise UncoverableFlightsError(np.flatnonzero(counts == 0).tolist(), allpairs)
        e = _place(pairs, sel, e, picks, before, counts, allpairs)
    if remove_redundant:
        _drop_in_place(pairs, sel, e, counts, allpairs)
    return Chromosome(pairs, sel, e)


def _drop_in_place(pairs, sel, e, counts, allpairs) -> None:
    act = np.flatnonzero(sel[:e])
    keep = K.drop_redundant(counts, allpairs.pair_indptr, allpairs.pair_flights,
                            np.ascontiguousarray(pairs[act]))
    sel[act[keep == 0]] = False


def redundant_pairing_removal(c: Chromosome, allpairs: AllPairs) -> Chromosome:
    """Switch off, in gene order, every active expressed pairing whose
    flights all stay covered without it."""
    pairs = c.pairings.copy()
    sel = c.selected.copy()
    counts = _counts(allpairs, c.active())
    if (counts == 0).any():
        raise InfeasibleChromosomeError("redundant-pairing removal needs a feasible chromosome")
    _drop_in_place(pairs, sel, c.expressed_len, counts, allpairs)
    return Chromosome(pairs, sel, c.expressed_len)


def is_feasible(c: Chromosome, allpairs: AllPairs) -> bool:
    return bool((_counts(allpairs, c.active()) > 0).all())


def evaluate(c: Chromosome, allpairs: AllPairs, cfg: FitnessConfig) -> int:
    """Total active pairing cost plus ``dhd_penalty`` per deadhead.

    Caches ``fitness``, ``cost`` and ``deadheads`` on the chromosome.
    Raises :class:`InfeasibleChromosomeError` if a flight is uncovered.
    """
    if c.fitness is not None:
        return c.fitness
    active = c.active()
    counts = _counts(allpairs, active)
    if (counts == 0).any():
        raise InfeasibleChromosomeError(
            f"flights {np.flatnonzero(counts == 0).tolist()[:10]} uncovered")
    cost = int(allpairs.costs[active].sum())
    deadheads = int(counts.sum()) - allpairs.num_flights
    c.cost = cost
    c.deadheads = deadheads
    c.fitness = cost + deadheads * cfg.dhd_penalty
    return c.fitness


def replace_generational(parents: Sequence[Chromosome], children: Sequence[Chromosome]) -> list[Chromosome]:
    """Best ``n`` of ``n`` parents plus ``n`` children (ties: parents first,
    then lower index)."""
    n = len(parents)
    pool = [(c.fitness, 0, i, c) for i, c in enumerate(parents)]
    pool += [(c.fitness, 1, i, c) for i, c in enumerate(children)]
    if any(f is None for f, *_ in pool):
        raise ValueError("all chromosomes must be evaluated")
    pool.sort(key=lambda t: t[:3])
    return [t[3] for t in pool[:n]]
