import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lyopce.physics import default_conditions, default_parameters

# compiled kernels make the first example of a property slow
settings.register_profile(
    "lyopce", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("lyopce")


@pytest.fixture(scope="session")
def params():
    return default_parameters()


@pytest.fixture(scope="session")
def primary_conditions():
    return default_conditions("primary")


@pytest.fixture(scope="session")
def secondary_conditions():
    return default_conditions("secondary")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# acceptance verdicts, reported again at the end of the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
