import logfire
import numpy as np
import pytest

from shop_sim.behavior import UserBehaviorModel
from ssmdp_core.types import Catalog, TabularSSMDP

logfire.configure(send_to_logfire=False, console=False)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def small_catalog():
    """40 items with 4 features on [0, 1]; T = 8 at K = 5."""
    features = np.random.default_rng(11).uniform(0.0, 1.0, size=(40, 4))
    return Catalog(np.arange(40), features)


@pytest.fixture
def behavior(small_catalog):
    preference = np.array([-0.3, 0.6, 0.5, 0.2])
    return UserBehaviorModel(
        preference=preference / np.linalg.norm(preference),
        attraction_scale=4.0,
        conversion_offset=3.0,
        base_leave=0.05,
        fatigue=0.02,
        horizon=8,
    )


@pytest.fixture
def two_step_mdp():
    return TabularSSMDP(T=2, b=(0.2, 0.3), c=(0.5, 0.0), m=(10.0, 20.0))
