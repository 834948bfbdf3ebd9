import math

import numpy as np
import pytest

from innerfn.inner import AtomicSingular, FiniteBlaschke

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def S():
    return AtomicSingular()


@pytest.fixture(scope="session")
def a_inv_e():
    return math.exp(-1)


@pytest.fixture
def blaschke_half():
    return FiniteBlaschke(np.array([0.5]))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
