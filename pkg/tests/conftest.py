import numpy as np
import pytest

from povm_labeler import computational_basis, random_observable, trine, validate

ACCEPTANCE_LINES = []


def random_obs(seed, n, d, rank=None):
    return random_observable(n, d, np.random.default_rng(seed), rank=rank)


@pytest.fixture
def trine_obs():
    return trine()


@pytest.fixture
def qutrit():
    return computational_basis(3)


@pytest.fixture
def split_zero():
    """{|0><0|/2, |0><0|/2, |1><1|}: two equal effects plus a projector."""
    p0 = np.diag([1.0, 0.0])
    return validate([p0 / 2, p0 / 2, np.diag([0.0, 1.0])])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
