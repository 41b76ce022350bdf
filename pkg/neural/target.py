from neural.mlp import Mlp
from ssmdp_core.errors import InvalidArgumentError


class TargetPair:
    """A live network and its slowly tracking target copy."""

    def __init__(self, live: Mlp, tau: float):
        if not 0.0 < tau <= 1.0:
            raise InvalidArgumentError(f"tau must lie in (0, 1], got {tau}")
        self.live = live
        self.target = live.clone()
        self.tau = tau


def soft_update(pair: TargetPair) -> TargetPair:
    """target <- τ·live + (1 − τ)·target, in place."""
    if pair.live.sizes != pair.target.sizes:
        raise InvalidArgumentError("live and target networks differ in shape")
    for live, target in zip(pair.live.params, pair.target.params):
        target *= 1.0 - pair.tau
        target += pair.tau * live
    return pair

