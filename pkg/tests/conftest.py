import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from crowgates.fock_space import DopantLevelSet, ModeSet, enumerate_basis

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

SQRT2 = math.sqrt(2.0)

# acceptance outcomes, filled by tests/test_acceptance.py and printed at the end
ACCEPTANCE_RESULTS: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def one_mode_cascade():
    """One mode up to two photons with one g-h-e dopant (dimension 9)."""
    return enumerate_basis(ModeSet(1, 2), [DopantLevelSet.cascade()])


@pytest.fixture
def two_mode_basis():
    return enumerate_basis(ModeSet(2, 2))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        name, ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n} [{'PASS' if ok else 'FAIL'}] {name}: {detail}")
