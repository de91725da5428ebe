import numpy as np
import pytest

from extremal.rng import RandomSource


@pytest.fixture
def rng():
    return RandomSource(20240601)


@pytest.fixture
def gen():
    return np.random.Generator(np.random.PCG64(7))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("]")[1].split(".")[0])):
            terminalreporter.write_line(line)
