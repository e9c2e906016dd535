import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from johncheck.core import BuiltinTwoGoodAssignment, FiniteMenuMixture, TypeProfile, example_menu

settings.register_profile(
    "default",
    max_examples=100,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def builtin():
    return BuiltinTwoGoodAssignment()


@pytest.fixture
def mixture():
    return FiniteMenuMixture(example_menu())


@pytest.fixture
def ref_point():
    return TypeProfile([2.0, 1.0], [0.0, 3.0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
