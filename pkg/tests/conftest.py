import numpy as np
import pytest

from nlscatter.linfield import RadialGrid


@pytest.fixture(scope="session")
def grid():
    return RadialGrid(M=2048)


@pytest.fixture(scope="session")
def interior(grid):
    r = grid.nodes
    return (r > 1.0) & (r < 0.9 * grid.r_max)


def rel_max(a, b):
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
