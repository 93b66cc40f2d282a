"""Customized genetic algorithm for the crew-pairing set-covering problem."""

from .chromosome import (
    Chromosome,
    ChromosomeCapacityError,
    FitnessConfig,
    InfeasibleChromosomeError,
)
from .engine import VARIANTS, GaConfig, RunRecord, Snapshot, TracePoint, run, seed_to_int
from .operators import (
    crossover1_fusion,
    crossover2_dhd_min,
    dhd_min_initialize,
    evaluate,
    is_feasible,
    mutation1_bitflip,
    mutation2_density,
    random_initialize,
    redundant_pairing_removal,
    repair,
    replace_generational,
    tournament_indices,
    tournament_select,
)

__all__ = [
    "Chromosome", "ChromosomeCapacityError", "FitnessConfig", "InfeasibleChromosomeError",
    "VARIANTS", "GaConfig", "RunRecord", "Snapshot", "TracePoint", "run", "seed_to_int",
    "crossover1_fusion", "crossover2_dhd_min", "dhd_min_initialize", "evaluate", "is_feasible",
    "mutation1_bitflip", "mutation2_density", "random_initialize", "redundant_pairing_removal",
    "repair", "replace_generational", "tournament_indices", "tournament_select",
]
