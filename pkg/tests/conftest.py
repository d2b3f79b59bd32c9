import numpy as np
import pytest

from igl.core import RngStream
from igl.envs import TabularEnvSpec, make_tabular_env, tab_2x3


@pytest.fixture
def tab_spec() -> TabularEnvSpec:
    return tab_2x3()


@pytest.fixture
def tab_env():
    return make_tabular_env(tab_2x3())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def stream():
    return RngStream(1234)
