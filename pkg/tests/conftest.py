import sys

import numpy as np
import pytest

from aspp import build_graph, grid_graph


@pytest.fixture
def path4():
    return build_graph(4, [(0, 1), (1, 2), (2, 3)], directed=False)


@pytest.fixture
def pair():
    return build_graph(2, [(0, 1)], directed=False)


@pytest.fixture
def isolated():
    return build_graph(1, [])


@pytest.fixture
def grid3():
    return grid_graph(3, 3, "moore8", "dead")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance")
        for line in lines:
            terminalreporter.write_line(line)
