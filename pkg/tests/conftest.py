import numpy as np
import pytest

from ratelqg.plant import pendulum_plant
from ratelqg.synthesis import LqgWeights, min_achievable_cost, synthesize


@pytest.fixture(scope="session")
def pendulum():
    return pendulum_plant()


@pytest.fixture(scope="session")
def pendulum_weights():
    return LqgWeights(np.eye(4), np.eye(1))


@pytest.fixture(scope="session")
def pendulum_floor(pendulum, pendulum_weights):
    return min_achievable_cost(pendulum, pendulum_weights)


@pytest.fixture(scope="session")
def pendulum_design(pendulum, pendulum_weights, pendulum_floor):
    return synthesize(pendulum, pendulum_weights.with_gamma(1.2 * pendulum_floor))
