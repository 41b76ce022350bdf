import numpy as np

from env_models.features import HistoryFeatures
from ssmdp_core.errors import InvalidArgumentError


class PriceModel:
    """Linear regression of the deal price on history features, clamped at zero on output."""

    def __init__(self, n_inputs: int, step_size: float = 0.001):
        if step_size < 0.0:
            raise InvalidArgumentError("step_size must be nonnegative")
        self.weights = np.zeros(n_inputs)
        self.bias = np.zeros(1)
        self.step_size = step_size

    def parameters(self) -> dict[str, np.ndarray]:
        return {"weights": self.weights, "bias": self.bias}

    def linear(self, feats: HistoryFeatures) -> float:
        return float(self.weights @ feats + self.bias[0])


def predict_price(model: PriceModel, feats: HistoryFeatures) -> float:
    return max(0.0, model.linear(feats))


def update_price(model: PriceModel, feats: HistoryFeatures, observed_price: float) -> PriceModel:
    """One squared-error step on the unclamped output, so a model stuck below zero can recover."""
    if observed_price < 0.0:
        raise InvalidArgumentError(f"deal prices are nonnegative, got {observed_price}")
    error = model.linear(feats) - observed_price
    model.weights -= model.step_size * error * feats
    model.bias -= model.step_size * error
    return model
