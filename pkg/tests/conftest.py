import pytest

from builders import alone_scenario, crossing_scenario, following_scenario
from cfmargin.sim.simulator import simulate


@pytest.fixture
def following_episode():
    return simulate(following_scenario())


@pytest.fixture
def crossing_episode():
    return simulate(crossing_scenario())


@pytest.fixture
def alone_episode():
    return simulate(alone_scenario())
