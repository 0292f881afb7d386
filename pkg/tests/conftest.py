import numpy as np
import pytest

from clockspin.config import RunConfig


@pytest.fixture(scope="session")
def default_config():
    return RunConfig.default()


@pytest.fixture(scope="session")
def system(default_config):
    return default_config.spin_system()


@pytest.fixture(scope="session")
def nuclei(default_config):
    return default_config.nuclei()


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
