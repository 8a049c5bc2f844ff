import numpy as np
import pytest

from radonosc import ConvexBody, MultiIndexSet, make_hilbert_kernel


@pytest.fixture
def hilbert():
    return make_hilbert_kernel()


@pytest.fixture
def interval():
    return ConvexBody.euclidean_ball(1)


@pytest.fixture
def cubic():
    return MultiIndexSet.from_degrees([3])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
