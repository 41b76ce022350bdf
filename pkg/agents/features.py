"""
State features for the agents: a query slot followed by the history encoding of the last
`window` pages.
"""

import numpy as np

from env_models.features import CatalogStats, HistoryEncoder
from ssmdp_core.errors import InvalidArgumentError
from ssmdp_core.types import Continuation

StateFeatures = np.ndarray


class StateEncoder:
    def __init__(self, stats: CatalogStats):
        self.history = HistoryEncoder(stats)

    @property
    def dim(self) -> int:
        return 1 + self.history.dim

    def __call__(self, state) -> StateFeatures:
        if not isinstance(state, Continuation):
            raise InvalidArgumentError(f"states are featurized only while the session continues, got {state.kind}")
        return np.concatenate(([1.0], self.history.encode(state.history)))


class OneHotStepEncoder:
    """One-hot over the step index 0..T: exact tabular features for a fixed-policy chain."""

    def __init__(self, horizon: int):
        self.horizon = horizon

    @property
    def dim(self) -> int:
        return self.horizon + 1

    def __call__(self, state) -> StateFeatures:
        if not isinstance(state, Continuation):
            raise InvalidArgumentError(f"states are featurized only while the session continues, got {state.kind}")
        out = np.zeros(self.dim)
        out[state.history.step] = 1.0
        return out


def featurize_state(state, context: CatalogStats) -> StateFeatures:
    return StateEncoder(context)(state)
