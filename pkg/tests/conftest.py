import numpy as np
import pytest

from camsel.presets import canonical_agent_config, canonical_world


@pytest.fixture(scope="session")
def world():
    return canonical_world()


@pytest.fixture(scope="session")
def agent_config():
    return canonical_agent_config()


@pytest.fixture
def rng():
    return np.random.default_rng(42)
