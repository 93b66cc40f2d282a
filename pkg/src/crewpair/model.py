"""Domain types for flights, duties, pairings and instances.

Times are integer minutes since the Unix epoch (UTC) and money is integer
cents, so every comparison in the toolkit is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Iterable, Sequence


class InstanceError(ValueError):
    """Raised when flights, rules or an instance break a structural invariant."""


@dataclass(frozen=True, slots=True)
class Flight:
    """A single timetable leg.

    Attributes
    ----------
    id : int
        Dense index 0..F-1 within its instance.
    origin, destination : str
        Upper-case airport codes.
    departure, arrival : int
        Minutes since epoch, UTC.
    """

    id: int
    origin: str
    destination: str
    departure: int
    arrival: int

    def __post_init__(self) -> None:
        if self.arrival <= self.departure:
            raise InstanceError(f"flight {self.id}: arrival must be after departure")
        if self.origin == self.destination:
            raise InstanceError(f"flight {self.id}: origin equals destination")
        if self.id < 0:
            raise InstanceError(f"flight {self.id}: negative id")

    @property
    def block_minutes(self) -> int:
        return self.arrival - self.departure


@dataclass(frozen=True, slots=True)
class LegalityRules:
    """Synthetic legality rule set; all durations in minutes.

    ``max_layover`` bounds rest arcs between duties, ``briefing`` and
    ``debriefing`` pad each duty's span.
    """

    min_sit: int = 30
    max_sit: int = 240
    max_duty_flying: int = 480
    max_duty_span: int = 720
    min_rest: int = 540
    max_duties_per_pairing: int = 4
    max_pairing_days: int = 5
    max_layover: int = 36 * 60
    briefing: int = 45
    debriefing: int = 30

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise InstanceError(f"rules.{f.name} must be an integer")
        positive = ("min_sit", "max_sit", "max_duty_flying", "max_duty_span",
                    "min_rest", "max_duties_per_pairing", "max_pairing_days", "max_layover")
        for name in positive:
            if getattr(self, name) <= 0:
                raise InstanceError(f"rules.{name} must be positive")
        if self.briefing < 0 or self.debriefing < 0:
            raise InstanceError("briefing/debriefing must be non-negative")
        if self.min_sit >= self.max_sit:
            raise InstanceError("rules.min_sit must be below rules.max_sit")
        if self.max_layover < self.min_rest:
            raise InstanceError("rules.max_layover must be at least rules.min_rest")


@dataclass(frozen=True, slots=True)
class CostModel:
    """Pairing cost model, all amounts in cents."""

    per_flying_minute: int = 100
    per_duty_fixed: int = 20_000
    hotel_night: int = 15_000
    pairing_guarantee_minimum: int = 60_000

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise InstanceError(f"cost_model.{f.name} must be a non-negative integer")


@dataclass(frozen=True, slots=True)
class Duty:
    """A working period of consecutive, space-time connected flights.

    ``start`` and ``end`` include briefing and debriefing.
    """

    flights: tuple[int, ...]
    briefing_minutes: int
    debriefing_minutes: int
    origin: str
    destination: str
    start: int
    end: int
    flying_minutes: int

    @classmethod
    def build(cls, legs: Sequence[Flight], rules: LegalityRules) -> "Duty":
        if not legs:
            raise InstanceError("a duty needs at least one flight")
        return cls(
            flights=tuple(f.id for f in legs),
            briefing_minutes=rules.briefing,
            debriefing_minutes=rules.debriefing,
            origin=legs[0].origin,
            destination=legs[-1].destination,
            start=legs[0].departure - rules.briefing,
            end=legs[-1].arrival + rules.debriefing,
            flying_minutes=sum(f.block_minutes for f in legs),
        )

    @property
    def span(self) -> int:
        return self.end - self.start


@dataclass(frozen=True, slots=True)
class Pairing:
    """A base-to-base sequence of duties with its cost and coverage."""

    id: int
    duties: tuple[Duty, ...]
    base: str
    cost: int
    coverage: frozenset[int] = field(compare=False)

    @property
    def flight_ids(self) -> tuple[int, ...]:
        return tuple(fid for d in self.duties for fid in d.flights)

    @property
    def duty_bounds(self) -> tuple[int, ...]:
        """Cumulative flight counts at each duty end, e.g. (2, 5)."""
        out, total = [], 0
        for d in self.duties:
            total += len(d.flights)
            out.append(total)
        return tuple(out)

    @property
    def flying_minutes(self) -> int:
        return sum(d.flying_minutes for d in self.duties)


@dataclass(frozen=True)
class Instance:
    flights: tuple[Flight, ...]
    bases: tuple[str, ...]
    rules: LegalityRules
    cost_model: CostModel

    def __post_init__(self) -> None:
        object.__setattr__(self, "flights", tuple(self.flights))
        object.__setattr__(self, "bases", tuple(self.bases))
        if not self.bases:
            raise InstanceError("an instance needs at least one crew base")
        ids = sorted(f.id for f in self.flights)
        if ids != list(range(len(ids))):
            raise InstanceError("flight ids must be dense 0..F-1")
        airports = {f.origin for f in self.flights} | {f.destination for f in self.flights}
        for base in self.bases:
            if base not in airports:
                raise InstanceError(f"base {base} is not served by any flight")
        # index by id so flights[i].id == i
        object.__setattr__(self, "flights", tuple(sorted(self.flights, key=lambda f: f.id)))

    @property
    def num_flights(self) -> int:
        return len(self.flights)


def pairing_cost(duties: Sequence[Duty], model: CostModel) -> int:
    """Cost of a pairing in cents.

    ``max(guarantee, rate * flying + fixed * duties + hotel * (duties - 1))``
    """
    n = len(duties)
    flying = sum(d.flying_minutes for d in duties)
    raw = model.per_flying_minute * flying + model.per_duty_fixed * n + model.hotel_night * max(n - 1, 0)
    return max(model.pairing_guarantee_minimum, raw)


def deadhead_count(coverage_counts: Iterable[int]) -> int:
    """Coverings beyond the first for every flight.

    For a feasible cover this equals ``sum(counts) - F``; uncovered flights
    (count 0) do not offset deadheads elsewhere.
    """
    return sum(c - 1 for c in coverage_counts if c > 1)


def make_pairing(pid: int, duties: Sequence[Duty], base: str, model: CostModel) -> Pairing:
    duties = tuple(duties)
    coverage = frozenset(fid for d in duties for fid in d.flights)
    return Pairing(id=pid, duties=duties, base=base, cost=pairing_cost(duties, model), coverage=coverage)
