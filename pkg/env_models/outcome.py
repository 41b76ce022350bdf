"""
Online 3-way softmax estimator of the conversion, abandon and continuing probabilities.
"""

from enum import IntEnum

import numpy as np
from scipy.special import softmax

from env_models.features import HistoryFeatures
from ssmdp_core.errors import InvalidArgumentError
from ssmdp_core.types import Conversion, Continuation


class OutcomeLabel(IntEnum):
    CONVERSION = 0
    ABANDON = 1
    CONTINUATION = 2

    @classmethod
    def of(cls, next_state) -> "OutcomeLabel":
        """B(h) -> conversion, C(h) -> continuation, anything else (L(h), truncation) -> abandon."""
        if isinstance(next_state, Conversion):
            return cls.CONVERSION
        if isinstance(next_state, Continuation):
            return cls.CONTINUATION
        return cls.ABANDON


class OutcomeClassifier:
    """Multinomial logistic regression over {conversion, abandon, continuation}."""

    def __init__(self, n_inputs: int, step_size: float = 0.002):
        if step_size < 0.0:
            raise InvalidArgumentError("step_size must be nonnegative")
        self.weights = np.zeros((3, n_inputs))
        self.bias = np.zeros(3)
        self.step_size = step_size

    def parameters(self) -> dict[str, np.ndarray]:
        return {"weights": self.weights, "bias": self.bias}

    def logits(self, feats: HistoryFeatures) -> np.ndarray:
        return self.weights @ feats + self.bias


def predict_outcome(model: OutcomeClassifier, feats: HistoryFeatures) -> tuple[float, float, float]:
    """(b, l, c) estimate for one history."""
    b, l, c = softmax(model.logits(feats))
    return float(b), float(l), float(c)


def update_outcome(model: OutcomeClassifier, feats: HistoryFeatures, label: OutcomeLabel) -> OutcomeClassifier:
    """One cross-entropy gradient step toward `label`; updates the model in place and returns it."""
    label = OutcomeLabel(label)
    error = softmax(model.logits(feats))
    error[label] -= 1.0
    model.weights -= model.step_size * np.outer(error, feats)
    model.bias -= model.step_size * error
    return model
