import pytest
from hypothesis import HealthCheck, settings

from searchcontest import make_exponential, make_pareto, make_uniform

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def uniform():
    return make_uniform(0.0, 1.0)


@pytest.fixture(scope="session")
def exponential():
    return make_exponential(1.0)


@pytest.fixture(scope="session")
def pareto():
    return make_pareto(2.0, 1.0)


@pytest.fixture(scope="session")
def trio(uniform, exponential, pareto):
    return [uniform, exponential, pareto]
