import numpy as np
import pytest

from ggbayes.data import meeker_dataset
from ggbayes.posterior import McmcConfig, run_chain


@pytest.fixture(scope="session")
def meeker():
    return meeker_dataset()


@pytest.fixture(scope="session")
def small_cfg():
    # enough draws to satisfy the length-100 diagnostics floor, cheap to run
    return McmcConfig(iterations=4000, burn_in=500, thin=5, seed=99)


@pytest.fixture(scope="session")
def meeker_chain(meeker, small_cfg):
    return run_chain(meeker, small_cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)
