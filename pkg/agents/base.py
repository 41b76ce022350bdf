"""
The uniform agent surface used by the session loop and the harness:
`rank(state, pool, K)` during a session and `observe(trajectory)` after it.
"""

from collections import Counter

import numpy as np

from neural.mlp import Mlp, forward
from neural.params import ParamStore, load_in_place
from shop_sim.session import SessionTrajectory
from ssmdp_core.ranking import top_k_list
from ssmdp_core.types import Catalog, Continuation, ItemPage, RankingAction


def exploration_scale(noise: float, halving: int, sessions_seen: int) -> float:
    """Noise std after `sessions_seen` sessions: halved every `halving` sessions."""
    return noise * 0.5 ** (sessions_seen // halving)


class Agent:
    """Base class: owns the agent random stream, a session counter and diagnostics."""

    kind = "agent"

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.explore = True
        self.counters = np.zeros(1)
        self.diagnostics: Counter = Counter()

    @property
    def sessions_seen(self) -> int:
        return int(self.counters[0])

    def rank(self, state: Continuation, pool: Catalog, K: int) -> tuple[RankingAction, ItemPage]:
        raise NotImplementedError

    def pretrain(self, trajectory: SessionTrajectory) -> None:
        """Warm-up hook for random-policy sessions before learning starts."""

    def learn(self, trajectory: SessionTrajectory) -> None:
        raise NotImplementedError

    def observe(self, trajectory: SessionTrajectory) -> None:
        self.learn(trajectory)
        self.counters[0] += 1.0

    def components(self) -> dict[str, object]:
        """Named parts exposing `state_arrays()` / `load_state_arrays()`."""
        return {}

    def param_store(self) -> ParamStore:
        store = ParamStore({"agent.counters": self.counters})
        for prefix, component in self.components().items():
            store.add(prefix, component.state_arrays())
        return store

    def load_param_store(self, store: ParamStore) -> None:
        load_in_place({"counters": self.counters}, store.section("agent"), "agent")
        for prefix, component in self.components().items():
            component.load_state_arrays(store.section(prefix))


class ArraysComponent:
    """Wraps a dict of arrays owned elsewhere so it can take part in a ParamStore."""

    def __init__(self, arrays: dict[str, np.ndarray]):
        self.arrays = arrays

    def state_arrays(self) -> dict[str, np.ndarray]:
        return self.arrays

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        load_in_place(self.arrays, arrays, "arrays")


class ActorAgent(Agent):
    """An agent whose policy is a network from state features to a ranking weight vector."""

    def __init__(self, encoder, actor: Mlp, noise: float, noise_halving: int, rng: np.random.Generator):
        super().__init__(rng)
        self.encoder = encoder
        self.actor = actor
        self.noise = noise
        self.noise_halving = noise_halving

    @property
    def noise_scale(self) -> float:
        return exploration_scale(self.noise, self.noise_halving, self.sessions_seen)

    def rank(self, state: Continuation, pool: Catalog, K: int) -> tuple[RankingAction, ItemPage]:
        action = act(self, self.encoder(state), self.explore, self.rng)
        return action, top_k_list(pool, action, K, step=state.history.step + 1)


def act(agent: ActorAgent, state_features: np.ndarray, explore: bool, rng: np.random.Generator) -> RankingAction:
    """π_θ(s), plus clamped Gaussian noise when exploring."""
    weights = forward(agent.actor, state_features)
    scale = agent.noise_scale
    if explore and scale > 0.0:
        weights = np.clip(weights + rng.normal(0.0, scale, size=weights.shape), -1.0, 1.0)
    return RankingAction(weights=weights)


class RandomAgent(Agent):
    """Uniform-random ranking weights in [-1, 1]^n; learns nothing."""

    kind = "random"

    def __init__(self, n_features: int, rng: np.random.Generator):
        super().__init__(rng)
        self.n_features = n_features

    def rank(self, state: Continuation, pool: Catalog, K: int) -> tuple[RankingAction, ItemPage]:
        action = RankingAction(weights=self.rng.uniform(-1.0, 1.0, size=self.n_features))
        return action, top_k_list(pool, action, K, step=state.history.step + 1)

    def learn(self, trajectory: SessionTrajectory) -> None:
        pass
