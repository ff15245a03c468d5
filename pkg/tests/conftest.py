import numpy as np
import pytest

from moodpop.config import default_config


@pytest.fixture(scope="session")
def config():
    return default_config()


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
