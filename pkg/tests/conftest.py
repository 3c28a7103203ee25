import numpy as np
import pytest

from massart_forge.hardpair import HardPairConfig, build_hard_pair

# the desk-scale configuration used throughout the acceptance criteria
DESK = dict(zeta=0.05, d=10, epsilon=0.05)


@pytest.fixture(scope="session")
def desk_config():
    return HardPairConfig(**DESK)


@pytest.fixture(scope="session")
def desk_pair(desk_config):
    return build_hard_pair(desk_config)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
