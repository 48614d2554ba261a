import numpy as np
import pytest

from latnagumo import GridSpec, ReactionParams, nearest_neighbor


@pytest.fixture
def grid():
    return GridSpec(L=10.0, N=199)


@pytest.fixture
def nn():
    return nearest_neighbor()


@pytest.fixture
def params():
    return ReactionParams(a=0.25, nu=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
