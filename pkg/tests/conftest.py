import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from martail import MarModel

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def mar11():
    return MarModel((0.6,), (0.4,))


@pytest.fixture
def mar01():
    return MarModel((), (0.4,))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
