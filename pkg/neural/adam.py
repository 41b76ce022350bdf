"""
Optimizers. Both take descent gradients and update parameter arrays in place.
"""

import logfire
import numpy as np

from neural.params import load_in_place
from ssmdp_core.errors import InvalidArgumentError


def _check_shapes(params: list[np.ndarray], grads: list[np.ndarray]):
    if len(params) != len(grads) or any(p.shape != g.shape for p, g in zip(params, grads)):
        raise InvalidArgumentError("gradients do not match parameter shapes")


def _finite(grads: list[np.ndarray]) -> bool:
    return all(np.all(np.isfinite(grad)) for grad in grads)


class AdamState:
    """First/second moments shaped like the parameters, the step counter and hyperparameters."""

    def __init__(self, params: list[np.ndarray], lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.first = [np.zeros_like(param) for param in params]
        self.second = [np.zeros_like(param) for param in params]
        self.counter = np.zeros(1)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.skipped = 0

    @property
    def t(self) -> int:
        return int(self.counter[0])

    def state_arrays(self) -> dict[str, np.ndarray]:
        arrays = {"t": self.counter}
        for index, (first, second) in enumerate(zip(self.first, self.second)):
            arrays[f"m{index}"] = first
            arrays[f"v{index}"] = second
        return arrays

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        load_in_place(self.state_arrays(), arrays, "adam")


def adam_step(params: list[np.ndarray], grads: list[np.ndarray], state: AdamState) -> bool:
    """
    Bias-corrected adaptive-moment descent step. Returns False, leaving everything untouched,
    when a gradient is not finite.
    """
    _check_shapes(params, grads)
    if not _finite(grads):
        state.skipped += 1
        logfire.warn("adam step skipped: non-finite gradient (skipped={skipped})", skipped=state.skipped)
        return False
    state.counter += 1.0
    t = state.t
    correction1 = 1.0 - state.beta1 ** t
    correction2 = 1.0 - state.beta2 ** t
    for param, grad, first, second in zip(params, grads, state.first, state.second):
        first *= state.beta1
        first += (1.0 - state.beta1) * grad
        second *= state.beta2
        second += (1.0 - state.beta2) * grad * grad
        param -= state.lr * (first / correction1) / (np.sqrt(second / correction2) + state.eps)
    return True


class Adam:
    def __init__(self, params: list[np.ndarray], lr: float):
        self.params = params
        self.state = AdamState(params, lr)

    def step(self, grads: list[np.ndarray]) -> bool:
        return adam_step(self.params, grads, self.state)

    @property
    def skipped(self) -> int:
        return self.state.skipped

    def state_arrays(self) -> dict[str, np.ndarray]:
        return self.state.state_arrays()

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        self.state.load_state_arrays(arrays)


class GradientStep:
    """Plain `param -= lr * grad`."""

    def __init__(self, params: list[np.ndarray], lr: float):
        self.params = params
        self.lr = lr
        self.skipped = 0

    def step(self, grads: list[np.ndarray]) -> bool:
        _check_shapes(self.params, grads)
        if not _finite(grads):
            self.skipped += 1
            logfire.warn("gradient step skipped: non-finite gradient (skipped={skipped})", skipped=self.skipped)
            return False
        for param, grad in zip(self.params, grads):
            param -= self.lr * grad
        return True

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {}

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        load_in_place({}, arrays, "sgd")


def make_optimizer(kind: str, params: list[np.ndarray], lr: float):
    if kind == "adam":
        return Adam(params, lr)
    if kind == "sgd":
        return GradientStep(params, lr)
    raise InvalidArgumentError(f"unknown optimizer {kind!r}")
