import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from crewpair.oracle import SyntheticSpec, generate_instance  # noqa: E402
from crewpair.pairings import enumerate_pairings  # noqa: E402

settings.register_profile("default", deadline=None, derandomize=True)
settings.load_profile("default")

# instance used by the GA quality, initialization and crossover checks
BENCH_SPEC = SyntheticSpec(50, seed=0)
BENCH_PENALTY = 10_000


@pytest.fixture(scope="session")
def bench_instance():
    return generate_instance(BENCH_SPEC)


@pytest.fixture(scope="session")
def bench_allpairs(bench_instance):
    return enumerate_pairings(bench_instance)


@pytest.fixture(scope="session")
def small_allpairs():
    """A handful of coverable instances of 8-20 flights."""
    out = []
    for seed, n in enumerate((8, 12, 16, 20)):
        out.append(enumerate_pairings(generate_instance(SyntheticSpec(n, num_airports=4, seed=seed))))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
