import numpy as np
import pytest

from weaksrk.families import dri1, euler
from weaksrk.tableau import compile_plan

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def dri1_plan():
    return compile_plan(dri1())


@pytest.fixture(scope="session")
def euler_plan():
    return compile_plan(euler())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
