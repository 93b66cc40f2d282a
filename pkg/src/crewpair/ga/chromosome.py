from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InfeasibleChromosomeError(ValueError):
    """A chromosome that leaves some flight uncovered was evaluated."""


class ChromosomeCapacityError(RuntimeError):
    """A feasible cover needs more genes than the fixed chromosome length."""


@dataclass(frozen=True)
class FitnessConfig:
    dhd_penalty: int = 0

    def __post_init__(self) -> None:
        if self.dhd_penalty < 0:
            raise ValueError("dhd_penalty must be non-negative")


class Chromosome:
    """Fixed-length vector of two-bit genes.

    Gene ``k`` is (``selected[k]``, ``pairings[k]``): a participation bit and a
    reference into AllPairs. The first ``expressed_len`` genes are the
    expressed part; only expressed genes with the bit set form the solution.
    Gene arrays are read-only, so a fitness cached by :func:`evaluate` can
    never go stale: every operator returns a fresh chromosome.
    """

    __slots__ = ("pairings", "selected", "expressed_len", "fitness", "cost", "deadheads")

    def __init__(self, pairings, selected, expressed_len: int):
        pairings = np.array(pairings, dtype=np.int32)
        selected = np.array(selected, dtype=bool)
        if pairings.shape != selected.shape or pairings.ndim != 1:
            raise ValueError("gene arrays must be 1-D and equally long")
        if not 0 <= expressed_len <= len(pairings):
            raise ValueError("expressed_len out of range")
        pairings.flags.writeable = False
        selected.flags.writeable = False
        self.pairings = pairings
        self.selected = selected
        self.expressed_len = int(expressed_len)
        self.fitness: int | None = None
        self.cost: int | None = None
        self.deadheads: int | None = None

    def __len__(self) -> int:
        return len(self.pairings)

    def __repr__(self) -> str:
        return (f"Chromosome(len={len(self)}, expressed={self.expressed_len}, "
                f"active={len(self.active())}, fitness={self.fitness})")

    def active(self) -> np.ndarray:
        """Pairing ids of expressed genes whose participation bit is set."""
        e = self.expressed_len
        return self.pairings[:e][self.selected[:e]]

    def same_genes(self, other: "Chromosome") -> bool:
        return (self.expressed_len == other.expressed_len
                and np.array_equal(self.pairings, other.pairings)
                and np.array_equal(self.selected, other.selected))
