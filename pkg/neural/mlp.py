"""
Multilayer perceptrons with rectifier hidden layers and exact backpropagation, including the
gradient with respect to the input (needed for ∇_a Q in the deterministic policy gradient).
"""

from typing import Literal

import numpy as np

from neural.params import load_in_place
from ssmdp_core.errors import InvalidArgumentError

Activation = Literal["relu", "tanh", "identity"]


def _activate(kind: str, z: np.ndarray) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "tanh":
        return np.tanh(z)
    return z


def _activation_grad(kind: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if kind == "relu":
        return (z > 0.0).astype(np.float64)
    if kind == "tanh":
        return 1.0 - a * a
    return np.ones_like(z)


class Mlp:
    """
    Fully connected network. Layer i maps `sizes[i]` to `sizes[i+1]`; hidden layers use a
    rectifier and the last layer uses `output_activation`.

    `params` holds [W0, b0, W1, b1, ...] with Wi shaped (sizes[i], sizes[i+1]); gradients
    come back in the same order.
    """

    def __init__(
        self,
        sizes: tuple[int, ...] | list[int],
        output_activation: Activation = "identity",
        rng: np.random.Generator | None = None,
    ):
        if len(sizes) < 2 or min(sizes) < 1:
            raise InvalidArgumentError(f"invalid layer sizes {sizes}")
        if output_activation not in ("relu", "tanh", "identity"):
            raise InvalidArgumentError(f"unknown output activation {output_activation}")
        self.sizes = tuple(int(size) for size in sizes)
        self.output_activation = output_activation
        self.params: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            if rng is None:
                weight = np.zeros((fan_in, fan_out))
            else:
                limit = np.sqrt(6.0 / (fan_in + fan_out))
                weight = rng.uniform(-limit, limit, size=(fan_in, fan_out))
            self.params += [weight, np.zeros(fan_out)]

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    @property
    def n_inputs(self) -> int:
        return self.sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.sizes[-1]

    def activation(self, layer: int) -> str:
        return self.output_activation if layer == self.n_layers - 1 else "relu"

    def clone(self) -> "Mlp":
        twin = Mlp(self.sizes, self.output_activation)
        twin.params = [param.copy() for param in self.params]
        return twin

    def state_arrays(self) -> dict[str, np.ndarray]:
        names = []
        for layer in range(self.n_layers):
            names += [f"W{layer}", f"b{layer}"]
        return dict(zip(names, self.params))

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        load_in_place(self.state_arrays(), arrays, "mlp")

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(param)) for param in self.params)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return forward(self, x)


def _forward_cache(net: Mlp, x: np.ndarray):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != net.n_inputs:
        raise InvalidArgumentError(f"input has dimension {x.shape[-1]}, network expects {net.n_inputs}")
    pre, post = [], [x]
    a = x
    for layer in range(net.n_layers):
        z = a @ net.params[2 * layer] + net.params[2 * layer + 1]
        a = _activate(net.activation(layer), z)
        pre.append(z)
        post.append(a)
    return pre, post


def forward(net: Mlp, x: np.ndarray) -> np.ndarray:
    """Output for a single input vector or a batch of row vectors."""
    return _forward_cache(net, x)[1][-1]


def backward(net: Mlp, x: np.ndarray, output_gradient: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """
    Gradients of Σ output·output_gradient with respect to every parameter (summed over the
    batch) and with respect to the input (per row).
    """
    pre, post = _forward_cache(net, x)
    delta = np.asarray(output_gradient, dtype=np.float64)
    if delta.shape != post[-1].shape:
        raise InvalidArgumentError(f"output gradient shape {delta.shape} != output shape {post[-1].shape}")
    grads: list[np.ndarray] = [np.empty(0)] * len(net.params)
    for layer in reversed(range(net.n_layers)):
        delta = delta * _activation_grad(net.activation(layer), pre[layer], post[layer + 1])
        inputs = post[layer]
        if inputs.ndim == 1:
            grads[2 * layer] = np.outer(inputs, delta)
            grads[2 * layer + 1] = delta.copy()
        else:
            grads[2 * layer] = inputs.T @ delta
            grads[2 * layer + 1] = delta.sum(axis=0)
        delta = delta @ net.params[2 * layer].T
    return grads, delta
