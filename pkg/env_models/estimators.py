"""
Estimates of b(h), c(h) and m(h) as consumed by the full-backup target.
"""

from typing import Protocol

import numpy as np

from env_models.features import HistoryEncoder
from env_models.outcome import OutcomeClassifier, OutcomeLabel, predict_outcome, update_outcome
from env_models.price import PriceModel, predict_price, update_price
from ssmdp_core.types import Conversion, ItemPageHistory


class EnvironmentEstimator(Protocol):
    def observe(self, history: ItemPageHistory, next_state) -> None: ...

    def estimate(self, history: ItemPageHistory) -> tuple[float, float, float]: ...

    def parameters(self) -> dict[str, np.ndarray]: ...


class LearnedEstimator:
    """Softmax outcome classifier plus linear price model over encoded histories."""

    def __init__(self, encoder: HistoryEncoder, outcome_step: float = 0.002, price_step: float = 0.001):
        self.encoder = encoder
        self.outcome = OutcomeClassifier(encoder.dim, outcome_step)
        self.price = PriceModel(encoder.dim, price_step)

    def observe(self, history: ItemPageHistory, next_state) -> None:
        feats = self.encoder(history)
        update_outcome(self.outcome, feats, OutcomeLabel.of(next_state))
        if isinstance(next_state, Conversion):
            update_price(self.price, feats, next_state.deal_price)

    def estimate(self, history: ItemPageHistory) -> tuple[float, float, float]:
        """(b, c, m) at the history."""
        feats = self.encoder(history)
        b, _, c = predict_outcome(self.outcome, feats)
        return b, c, predict_price(self.price, feats)

    def parameters(self) -> dict[str, np.ndarray]:
        return {
            **{f"outcome.{name}": value for name, value in self.outcome.parameters().items()},
            **{f"price.{name}": value for name, value in self.price.parameters().items()},
        }


class ExactEstimator:
    """Ground-truth b, c, m read from a behavior source; observing is a no-op."""

    def __init__(self, behavior):
        self.behavior = behavior

    def observe(self, history: ItemPageHistory, next_state) -> None:
        pass

    def estimate(self, history: ItemPageHistory) -> tuple[float, float, float]:
        b, _, c, m = self.behavior.probs(history)
        return b, c, m

    def parameters(self) -> dict[str, np.ndarray]:
        return {}
