"""Explicit legal-pairing enumeration over a duty network.

Legal duties are enumerated first, linked by rest arcs into a time-ordered
DAG, and every base-to-base path through that DAG that satisfies the
pairing rules becomes one column of the set-covering problem.
"""

from __future__ import annotations

import logging
from bisect import bisect_left
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import Duty, Flight, Instance, InstanceError, Pairing, make_pairing

log = logging.getLogger(__name__)

MINUTES_PER_DAY = 1440


class UncoverableFlightsError(InstanceError):
    """Some flights appear in no legal pairing."""

    def __init__(self, flights: Sequence[int], allpairs: "AllPairs | None" = None):
        self.flights = tuple(sorted(flights))
        self.allpairs = allpairs
        super().__init__(f"uncoverable flights: {list(self.flights)}")


@dataclass
class AllPairs:
    """The full pairing pool plus CSR incidence arrays used by the kernels.

    ``pair_indptr``/``pair_flights`` list each pairing's flights,
    ``flight_indptr``/``flight_pairs`` list each flight's covering pairings
    in ascending pairing id.
    """

    pairings: tuple[Pairing, ...]
    num_flights: int
    costs: np.ndarray = field(init=False, repr=False)
    sizes: np.ndarray = field(init=False, repr=False)
    pair_indptr: np.ndarray = field(init=False, repr=False)
    pair_flights: np.ndarray = field(init=False, repr=False)
    flight_indptr: np.ndarray = field(init=False, repr=False)
    flight_pairs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.pairings = tuple(self.pairings)
        for i, p in enumerate(self.pairings):
            if p.id != i:
                raise InstanceError("pairing ids must be dense 0..P-1 in order")
        seqs = [sorted(p.coverage) for p in self.pairings]
        self.costs = np.array([p.cost for p in self.pairings], dtype=np.int64)
        self.sizes = np.array([len(s) for s in seqs], dtype=np.int32)
        self.pair_indptr = np.zeros(len(seqs) + 1, dtype=np.int32)
        np.cumsum(self.sizes, out=self.pair_indptr[1:])
        self.pair_flights = np.array([f for s in seqs for f in s], dtype=np.int32)
        by_flight: list[list[int]] = [[] for _ in range(self.num_flights)]
        for pid, s in enumerate(seqs):
            for f in s:
                if not 0 <= f < self.num_flights:
                    raise InstanceError(f"pairing {pid} covers unknown flight {f}")
                by_flight[f].append(pid)
        self.flight_indptr = np.zeros(self.num_flights + 1, dtype=np.int32)
        np.cumsum([len(b) for b in by_flight], out=self.flight_indptr[1:])
        self.flight_pairs = np.array([p for b in by_flight for p in b], dtype=np.int32)
        for arr in (self.costs, self.sizes, self.pair_indptr, self.pair_flights,
                    self.flight_indptr, self.flight_pairs):
            arr.flags.writeable = False

    def __len__(self) -> int:
        return len(self.pairings)

    def covering(self, flight: int) -> np.ndarray:
        """Ids of the pairings that cover ``flight``."""
        return self.flight_pairs[self.flight_indptr[flight]:self.flight_indptr[flight + 1]]

    def flights_of(self, pid: int) -> np.ndarray:
        return self.pair_flights[self.pair_indptr[pid]:self.pair_indptr[pid + 1]]

    @property
    def uncoverable(self) -> tuple[int, ...]:
        empty = np.flatnonzero(np.diff(self.flight_indptr) == 0)
        return tuple(int(f) for f in empty)

    def require_coverable(self) -> None:
        missing = self.uncoverable
        if missing:
            raise UncoverableFlightsError(missing, self)


@dataclass(frozen=True)
class ConnectionGraph:
    duty_nodes: tuple[Duty, ...]
    rest_arcs: tuple[tuple[int, ...], ...]
    base_sources: dict[str, tuple[int, ...]]
    base_sinks: dict[str, tuple[int, ...]]


def _departures_by_airport(flights: Sequence[Flight]) -> dict[str, tuple[list[int], list[Flight]]]:
    grouped: dict[str, list[Flight]] = defaultdict(list)
    for f in flights:
        grouped[f.origin].append(f)
    out = {}
    for airport, legs in grouped.items():
        legs.sort(key=lambda f: (f.departure, f.id))
        out[airport] = ([f.departure for f in legs], legs)
    return out


def enumerate_duties(inst: Instance) -> list[Duty]:
    """All flight sequences that form a legal duty.

    Ordered by first flight id, then length, then flight-id sequence.
    """
    rules = inst.rules
    deps = _departures_by_airport(inst.flights)
    pad = rules.briefing + rules.debriefing
    found: list[tuple[int, ...]] = []

    def extend(chain: list[Flight], flying: int) -> None:
        found.append(tuple(f.id for f in chain))
        last = chain[-1]
        if last.destination not in deps:
            return
        times, legs = deps[last.destination]
        lo = bisect_left(times, last.arrival + rules.min_sit)
        hi = bisect_left(times, last.arrival + rules.max_sit + 1)
        for nxt in legs[lo:hi]:
            new_flying = flying + nxt.block_minutes
            if new_flying > rules.max_duty_flying:
                continue
            if nxt.arrival - chain[0].departure + pad > rules.max_duty_span:
                continue
            chain.append(nxt)
            extend(chain, new_flying)
            chain.pop()

    for f in inst.flights:
        if f.block_minutes > rules.max_duty_flying or f.block_minutes + pad > rules.max_duty_span:
            continue
        extend([f], f.block_minutes)

    found.sort(key=lambda seq: (seq[0], len(seq), seq))
    return [Duty.build([inst.flights[i] for i in seq], rules) for seq in found]


def build_graph(inst: Instance, duties: Sequence[Duty] | None = None) -> ConnectionGraph:
    """Link duties by legal rest periods."""
    rules = inst.rules
    if duties is None:
        duties = enumerate_duties(inst)
    duties = tuple(duties)
    starts: dict[str, list[tuple[int, int]]] = defaultdict(list)
    for idx, d in enumerate(duties):
        starts[d.origin].append((d.start, idx))
    for lst in starts.values():
        lst.sort()
    arcs = []
    for d in duties:
        cands = starts.get(d.destination, [])
        lo = bisect_left(cands, (d.end + rules.min_rest, -1))
        hi = bisect_left(cands, (d.end + rules.max_layover + 1, -1))
        arcs.append(tuple(sorted(idx for _, idx in cands[lo:hi])))
    sources = {b: tuple(i for i, d in enumerate(duties) if d.origin == b) for b in inst.bases}
    sinks = {b: tuple(i for i, d in enumerate(duties) if d.destination == b) for b in inst.bases}
    return ConnectionGraph(duties, tuple(arcs), sources, sinks)


_worker_state: dict = {}


def _init_worker(inst: Instance, graph: ConnectionGraph) -> None:
    _worker_state["inst"] = inst
    _worker_state["graph"] = graph


def _paths_from(base: str, source: int, inst: Instance | None = None,
                graph: ConnectionGraph | None = None) -> list[tuple[int, ...]]:
    inst = inst or _worker_state["inst"]
    graph = graph or _worker_state["graph"]
    rules = inst.rules
    duties = graph.duty_nodes
    max_span = rules.max_pairing_days * MINUTES_PER_DAY
    first = duties[source]
    out: list[tuple[int, ...]] = []
    path = [source]

    def walk(node: int) -> None:
        d = duties[node]
        if d.end - first.start > max_span:
            return
        if d.destination == base:
            # a crew back at its base is released, so the pairing ends here
            out.append(tuple(path))
            return
        if len(path) >= rules.max_duties_per_pairing:
            return
        for nxt in graph.rest_arcs[node]:
            path.append(nxt)
            walk(nxt)
            path.pop()

    walk(source)
    return out


def enumerate_pairings(inst: Instance, graph: ConnectionGraph | None = None, *,
                       workers: int = 1, strict: bool = True) -> AllPairs:
    """Every legal base-to-base pairing, costed and numbered canonically.

    Parameters
    ----------
    inst : Instance
    graph : ConnectionGraph, optional
        Built from ``inst`` when omitted.
    workers : int
        Process fan-out over source duties. Output order does not depend
        on it.
    strict : bool
        Raise :class:`UncoverableFlightsError` if some flight is in no
        pairing; otherwise return the partial pool.
    """
    if graph is None:
        graph = build_graph(inst)
    tasks = [(b, s) for b in inst.bases for s in graph.base_sources[b]]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(inst, graph)) as pool:
            results = list(pool.map(_paths_from, *zip(*tasks), chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_paths_from(b, s, inst, graph) for b, s in tasks]

    # identical flight sequences are merged unless the duty split changes the cost
    unique: dict[tuple[int, ...], dict[int, tuple]] = {}
    for (base, _), paths in zip(tasks, results):
        for path in paths:
            duties = tuple(graph.duty_nodes[i] for i in path)
            proto = make_pairing(0, duties, base, inst.cost_model)
            key = proto.flight_ids
            by_cost = unique.setdefault(key, {})
            prev = by_cost.get(proto.cost)
            if prev is None or proto.duty_bounds < prev.duty_bounds:
                by_cost[proto.cost] = proto
    protos = sorted((p for d in unique.values() for p in d.values()),
                    key=lambda p: (p.flight_ids, p.duty_bounds, p.base))
    pairings = tuple(make_pairing(i, p.duties, p.base, inst.cost_model) for i, p in enumerate(protos))
    allpairs = AllPairs(pairings, inst.num_flights)
    log.info("enumerated %d duties, %d pairings", len(graph.duty_nodes), len(pairings))
    if strict:
        allpairs.require_coverable()
    return allpairs


def check_pairing(p: Pairing, inst: Instance) -> list[str]:
    """Re-derive every duty and pairing rule from raw flight fields.

    Returns the list of violations; empty means legal.
    """
    rules = inst.rules
    flights = inst.flights
    problems = []
    if not p.duties:
        return ["pairing has no duties"]
    seen: set[int] = set()
    for k, d in enumerate(p.duties):
        legs = [flights[i] for i in d.flights]
        if not legs:
            problems.append(f"duty {k} is empty")
            continue
        for a, b in zip(legs, legs[1:]):
            if a.destination != b.origin:
                problems.append(f"duty {k}: {a.id}->{b.id} not connected")
            sit = b.departure - a.arrival
            if not rules.min_sit <= sit <= rules.max_sit:
                problems.append(f"duty {k}: sit {sit} outside [{rules.min_sit}, {rules.max_sit}]")
        span = legs[-1].arrival - legs[0].departure + rules.briefing + rules.debriefing
        if span > rules.max_duty_span:
            problems.append(f"duty {k}: span {span} > {rules.max_duty_span}")
        flying = sum(f.arrival - f.departure for f in legs)
        if flying > rules.max_duty_flying:
            problems.append(f"duty {k}: flying {flying} > {rules.max_duty_flying}")
        for f in legs:
            if f.id in seen:
                problems.append(f"flight {f.id} repeats")
            seen.add(f.id)
    firsts = [flights[d.flights[0]] for d in p.duties if d.flights]
    lasts = [flights[d.flights[-1]] for d in p.duties if d.flights]
    if firsts and firsts[0].origin != p.base:
        problems.append("first duty does not depart from base")
    if lasts and lasts[-1].destination != p.base:
        problems.append("last duty does not return to base")
    for k in range(len(lasts) - 1):
        if lasts[k].destination != firsts[k + 1].origin:
            problems.append(f"duties {k},{k + 1} not connected")
        if lasts[k].destination == p.base:
            problems.append(f"duty {k} ends at base mid-pairing")
        rest = (firsts[k + 1].departure - rules.briefing) - (lasts[k].arrival + rules.debriefing)
        if not rules.min_rest <= rest <= rules.max_layover:
            problems.append(f"rest {rest} after duty {k} outside [{rules.min_rest}, {rules.max_layover}]")
    if len(p.duties) > rules.max_duties_per_pairing:
        problems.append("too many duties")
    if firsts and lasts:
        total = (lasts[-1].arrival + rules.debriefing) - (firsts[0].departure - rules.briefing)
        if total > rules.max_pairing_days * MINUTES_PER_DAY:
            problems.append("pairing exceeds max days")
    if p.coverage != frozenset(seen):
        problems.append("coverage does not match duty flights")
    m = inst.cost_model
    n = len(p.duties)
    flown = sum(flights[i].arrival - flights[i].departure for i in seen)
    expected = max(m.pairing_guarantee_minimum,
                   m.per_flying_minute * flown + m.per_duty_fixed * n + m.hotel_night * (n - 1))
    if p.cost != expected:
        problems.append(f"cost {p.cost} does not match cost model ({expected})")
    return problems
