"""Synthetic instances, an exact small-instance solver and a greedy baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels as K
from .ga.engine import RunRecord, Snapshot, TracePoint
from .model import CostModel, Duty, Flight, Instance, LegalityRules, make_pairing
from .pairings import AllPairs, UncoverableFlightsError, check_pairing

EPOCH_2024 = 28_401_120  # 2024-01-01T00:00Z in minutes since epoch
MAX_ATTEMPTS = 1000

_CODES = ("DAL", "HOU", "AUS", "SAT", "ELP", "LBB", "MAF", "AMA", "MSY", "OKC", "TUL", "LIT",
          "MEM", "BNA", "STL", "MCI", "DEN", "PHX", "ABQ", "ATL", "BHM", "JAN", "CRP", "HRL")


class SizeGuardError(ValueError):
    """The instance is too large for the exact solver."""


@dataclass(frozen=True)
class SyntheticSpec:
    num_flights: int
    num_airports: int = 6
    num_bases: int = 1
    time_horizon: int = 3
    hub_factor: float = 0.3
    seed: int = 0
    rules: LegalityRules = field(default_factory=LegalityRules)
    cost_model: CostModel = field(default_factory=CostModel)

    def __post_init__(self) -> None:
        if self.num_flights < 2:
            raise ValueError("need at least two flights (one out-and-back)")
        if self.num_airports < 2:
            raise ValueError("need at least two airports")
        if not 1 <= self.num_bases < self.num_airports:
            raise ValueError("num_bases must be in [1, num_airports)")
        if self.num_flights < 2 * self.num_bases:
            raise ValueError("need at least two flights per base")
        if self.time_horizon < 1:
            raise ValueError("time_horizon must be at least one day")
        if not 0.0 <= self.hub_factor <= 1.0:
            raise ValueError("hub_factor must lie in [0, 1]")


def _airport_codes(n: int) -> list[str]:
    codes = list(_CODES[:n])
    i = 0
    while len(codes) < n:
        codes.append("Q" + chr(65 + i // 26 % 26) + chr(65 + i % 26))
        i += 1
    return codes


def _rotation_route(rng, base, airports, bases, k, duty_ends, hub_factor):
    route = [base]
    others = [a for a in airports if a != base]
    for i in range(1, k):
        must_leave_base = i == k - 1 or i in duty_ends
        cands = [a for a in others if a != route[-1]]
        if route[-1] != base and not must_leave_base and rng.random() < hub_factor:
            route.append(base)
            continue
        # prefer non-base airports; other crew bases are ordinary stations here
        plain = [a for a in cands if a not in bases] or cands
        if not plain:
            return None
        route.append(plain[int(rng.integers(len(plain)))])
    if route[-1] == base:
        return None
    route.append(base)
    return route


def _split(rng, k, rules):
    lo = math.ceil(k / 3)
    hi = min(k, 3, rules.max_duties_per_pairing)
    if lo > hi:
        return None
    n = int(rng.integers(lo, hi + 1))
    while True:
        sizes = [1] * n
        for _ in range(k - n):
            sizes[int(rng.integers(n))] += 1
        if max(sizes) <= 3:
            return sizes


def _rotation(rng, spec, base, airports, bases, k):
    rules = spec.rules
    sizes = _split(rng, k, rules)
    if sizes is None:
        return None
    ends = set(np.cumsum(sizes)[:-1].tolist())
    route = _rotation_route(rng, base, airports, bases, k, ends, spec.hub_factor)
    if route is None:
        return None
    day = int(rng.integers(spec.time_horizon))
    t = EPOCH_2024 + day * 1440 + 300 + 5 * int(rng.integers(0, 97))
    legs = []
    for i in range(k):
        block = 5 * int(rng.integers(10, 31))
        legs.append((route[i], route[i + 1], t, t + block))
        t += block
        if i + 1 in ends:
            rest = rules.min_rest + 5 * int(rng.integers(0, 49))
            t += rules.debriefing + rest + rules.briefing
        else:
            t += int(rng.integers(rules.min_sit, min(rules.max_sit, 120) + 1))
    return legs, sizes


def generate_instance(spec: SyntheticSpec) -> Instance:
    """Build a coverable synthetic instance from base-anchored rotations.

    Every rotation is itself a legal pairing, so the instance is coverable
    by construction; each rotation is re-checked against the rules before
    it is accepted. Flight ids follow departure order.
    """
    rng = np.random.default_rng(spec.seed)
    airports = _airport_codes(spec.num_airports)
    bases = airports[:spec.num_bases]
    for _ in range(MAX_ATTEMPTS):
        legs, ok = _build_legs(rng, spec, airports, bases)
        if ok:
            break
    else:
        raise ValueError(f"no coverable instance after {MAX_ATTEMPTS} attempts for {spec}")
    order = sorted(range(len(legs)), key=lambda i: (legs[i][0][2], legs[i][0][0], legs[i][0][1], i))
    flights = [Flight(new_id, *legs[old][0]) for new_id, old in enumerate(order)]
    return Instance(tuple(flights), tuple(bases), spec.rules, spec.cost_model)


def _build_legs(rng, spec, airports, bases):
    """One attempt: list of (leg, rotation index); ok=False when stuck."""
    legs = []
    remaining = spec.num_flights
    rot = 0
    while remaining:
        # leave two flights for each base still waiting for its first rotation
        reserve = 2 * max(0, len(bases) - rot - 1)
        sizes_ok = [k for k in range(2, min(6, remaining - reserve) + 1) if remaining - k != 1]
        if not sizes_ok:
            return legs, False
        base = bases[int(rng.integers(len(bases)))]
        if rot < len(bases):
            # every base gets at least one rotation
            base = bases[rot]
        for _ in range(50):
            k = sizes_ok[int(rng.integers(len(sizes_ok)))]
            made = _rotation(rng, spec, base, airports, bases, k)
            if made is not None and _rotation_legal(made, base, spec):
                break
        else:
            return legs, False
        for leg in made[0]:
            legs.append((leg, rot))
        remaining -= k
        rot += 1
    return legs, True


def _rotation_legal(made, base, spec) -> bool:
    legs, sizes = made
    flights = [Flight(i, *leg) for i, leg in enumerate(legs)]
    inst = Instance(tuple(flights), (base,), spec.rules, spec.cost_model)
    duties, start = [], 0
    for s in sizes:
        duties.append(Duty.build(flights[start:start + s], spec.rules))
        start += s
    return not check_pairing(make_pairing(0, duties, base, spec.cost_model), inst)


@dataclass(frozen=True)
class OracleResult:
    method: str
    objective_cents: int
    cost_cents: int
    deadheads: int
    selection: tuple[int, ...]

    def to_record(self) -> RunRecord:
        """Wrap as a RunRecord so reports treat oracle and GA results alike."""
        snap = Snapshot(self.objective_cents, self.cost_cents, self.deadheads, len(self.selection))
        return RunRecord(config=self.method, seed=0, fitness_cents=self.objective_cents,
                         cost_cents=self.cost_cents, deadheads=self.deadheads,
                         num_pairings=len(self.selection), selection=self.selection, generations=0,
                         early=snap, trace=(TracePoint(0.0, 0, self.objective_cents, self.deadheads),))


def _result(method: str, allpairs: AllPairs, selection, penalty: int) -> OracleResult:
    sel = tuple(sorted(int(p) for p in selection))
    cost = int(sum(int(allpairs.costs[p]) for p in sel))
    covered = int(sum(int(allpairs.sizes[p]) for p in sel))
    dh = covered - allpairs.num_flights
    return OracleResult(method, cost + dh * penalty, cost, dh, sel)


def solve_greedy(allpairs: AllPairs, penalty: int = 0) -> OracleResult:
    """Repeated minimum quality-index pick, then redundant-pairing removal."""
    allpairs.require_coverable()
    counts = np.zeros(allpairs.num_flights, dtype=np.int32)
    picks = K.qi_fill(counts, allpairs.costs, allpairs.pair_indptr, allpairs.pair_flights,
                      np.arange(len(allpairs), dtype=np.int32))
    if (counts == 0).any():
        raise UncoverableFlightsError(np.flatnonzero(counts == 0).tolist(), allpairs)
    keep = K.drop_redundant(counts, allpairs.pair_indptr, allpairs.pair_flights, picks)
    return _result("greedy", allpairs, picks[keep.astype(bool)], penalty)


def solve_exact(allpairs: AllPairs, penalty: int = 0, *, max_pairings: int = 5000,
                override: bool = False) -> OracleResult:
    """Optimal penalized cover by depth-first branch and bound.

    The penalized objective equals a plain weighted cover with weights
    ``cost + penalty * size`` minus the constant ``penalty * F``. Nodes
    branch on the uncovered flight with the fewest candidates, trying
    pairings by quality index. The lower bound charges every uncovered
    flight its cheapest per-flight share ``weight / new flights`` over its
    covering pairings; any cover pays at least that much. A node is also
    dropped when the same uncovered set was reached before at no higher
    cost.
    """
    P, F = len(allpairs), allpairs.num_flights
    if P > max_pairings and not override:
        raise SizeGuardError(f"{P} pairings exceed the exact-solver guard of {max_pairings}")
    allpairs.require_coverable()
    weights = allpairs.costs.astype(np.float64) + penalty * allpairs.sizes
    iweights = [int(c) + penalty * int(s) for c, s in zip(allpairs.costs, allpairs.sizes)]
    inc = np.zeros((P, F), dtype=np.float64)
    for p in range(P):
        inc[p, allpairs.flights_of(p)] = 1.0
    masks = [sum(1 << int(f) for f in allpairs.flights_of(p)) for p in range(P)]
    cover = [allpairs.covering(f) for f in range(F)]
    fptr = allpairs.flight_indptr
    fpairs = allpairs.flight_pairs

    greedy = solve_greedy(allpairs, penalty)
    best_w = sum(iweights[p] for p in greedy.selection)
    best_sel = list(greedy.selection)
    seen: dict[int, int] = {}
    chosen: list[int] = []

    def dfs(uncovered: int, partial: int) -> None:
        nonlocal best_w, best_sel
        if uncovered == 0:
            if partial < best_w:
                best_w, best_sel = partial, list(chosen)
            return
        prev = seen.get(uncovered)
        if prev is not None and prev <= partial:
            return
        seen[uncovered] = partial
        u = np.array([(uncovered >> f) & 1 for f in range(F)], dtype=np.float64)
        new = inc @ u
        with np.errstate(divide="ignore"):
            ratio = np.where(new > 0, weights / np.maximum(new, 1), np.inf)
        per_flight = np.minimum.reduceat(ratio[fpairs], fptr[:-1])
        open_flights = np.flatnonzero(u)
        bound = float(per_flight[open_flights].sum())
        if math.ceil(partial + bound - 1e-6) >= best_w:
            return
        counts = np.diff(fptr)[open_flights]
        f = int(open_flights[np.argmin(counts)])
        cands = sorted(cover[f].tolist(), key=lambda p: (ratio[p], iweights[p], p))
        for p in cands:
            w = partial + iweights[p]
            if w >= best_w:
                continue
            chosen.append(p)
            dfs(uncovered & ~masks[p], w)
            chosen.pop()

    dfs((1 << F) - 1, 0)
    return _result("exact", allpairs, best_sel, penalty)
