"""Hand-built pairing pools for operator tests."""

import numpy as np

from crewpair.model import CostModel, Duty, Flight, LegalityRules, make_pairing
from crewpair.pairings import AllPairs

T = 28_401_120


def pool(sets, costs, num_flights=None):
    """AllPairs whose pairing ``j`` covers ``sets[j]`` at ``costs[j]`` cents."""
    F = num_flights if num_flights is not None else 1 + max(f for s in sets for f in s)
    flights = [Flight(i, "DAL", "HOU", T + 60 * i, T + 60 * i + 30) for i in range(F)]
    rules = LegalityRules()
    pairings = []
    for j, (s, c) in enumerate(zip(sets, costs)):
        duty = Duty.build([flights[i] for i in sorted(s)], rules)
        pairings.append(make_pairing(j, [duty], "DAL", CostModel(0, 0, 0, int(c))))
    return AllPairs(tuple(pairings), F)


def coverage(allpairs, active):
    counts = np.zeros(allpairs.num_flights, dtype=int)
    for p in active:
        counts[sorted(allpairs.pairings[int(p)].coverage)] += 1
    return counts


def brute_fitness(allpairs, chromosome, penalty):
    """Objective recomputed from raw pairing data."""
    e = chromosome.expressed_len
    active = [int(p) for p, b in zip(chromosome.pairings[:e], chromosome.selected[:e]) if b]
    counts = coverage(allpairs, active)
    assert (counts > 0).all()
    return sum(allpairs.pairings[p].cost for p in active) + penalty * int(counts.sum() - len(counts))


def has_partition(allpairs, candidates):
    """Exhaustive search for an exact cover among ``candidates``."""
    F = allpairs.num_flights
    sets = {int(j): frozenset(allpairs.pairings[int(j)].coverage) for j in candidates}

    def go(covered):
        if len(covered) == F:
            return True
        f = min(set(range(F)) - covered)
        return any(go(covered | s) for s in sets.values() if f in s and not (s & covered))

    return go(frozenset())


def is_one_minimal(allpairs, active):
    counts = coverage(allpairs, active)
    if not (counts > 0).all():
        return False
    for p in active:
        cov = sorted(allpairs.pairings[int(p)].coverage)
        if (counts[cov] >= 2).all():
            return False
    return True
