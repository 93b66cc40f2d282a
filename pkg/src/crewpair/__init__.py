"""Crew pairing toolkit: pairing generation, genetic search, exact and greedy baselines."""

__version__ = "0.1.0"
