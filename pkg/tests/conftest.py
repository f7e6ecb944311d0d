import numpy as np
import pytest

from cutproject import new_scheme

TAU = (1 + np.sqrt(5)) / 2

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def z_scheme():
    return new_scheme(1, 0, 1, [[1.0]], [0], name="Z")


@pytest.fixture(scope="session")
def two_z():
    return new_scheme(1, 0, 1, [[2.0]], [0], name="2Z")


@pytest.fixture(scope="session")
def fib():
    return new_scheme(1, 1, 1, [[1.0, TAU], [1.0, 1.0 - TAU]], [0, 0], name="fibonacci")


@pytest.fixture(scope="session")
def z4():
    return new_scheme(1, 0, 4, [[1.0]], [1], name="Z x Z/4")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
