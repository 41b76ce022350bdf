import numpy as np

from agents.bandits import CascadeUcbAgent, RankedExp3Agent
from agents.base import Agent, RandomAgent
from agents.config import AgentConfig
from agents.ddpg import DdpgAgent
from agents.dpg_fbe import DpgFbeAgent
from agents.features import StateEncoder
from agents.pointwise import PointwiseLtrAgent
from env_models.estimators import LearnedEstimator
from env_models.features import CatalogStats, HistoryEncoder
from ssmdp_core.errors import InvalidArgumentError
from ssmdp_core.types import Catalog


def build_agent(config: AgentConfig, catalog: Catalog, K: int, rng: np.random.Generator) -> Agent:
    """Construct the configured agent for a catalog; all of its randomness comes from `rng`."""
    n_features = catalog.n_features
    n_items = int(catalog.ids.max()) + 1
    stats = CatalogStats.from_catalog(catalog, K, config.history_window)

    match config.kind:
        case "dpg_fbe":
            estimator = LearnedEstimator(HistoryEncoder(stats), config.outcome_lr, config.price_lr)
            return DpgFbeAgent(StateEncoder(stats), n_features, estimator, config, rng)
        case "ddpg":
            return DdpgAgent(StateEncoder(stats), n_features, config, rng)
        case "pointwise":
            return PointwiseLtrAgent(StateEncoder(stats), n_features, config, rng)
        case "cascade_ucb1":
            return CascadeUcbAgent(n_items, n_features, "ucb1", rng)
        case "cascade_klucb":
            return CascadeUcbAgent(n_items, n_features, "kl", rng)
        case "ranked_exp3":
            return RankedExp3Agent(n_items, K, n_features, config.exp3_mixing, rng)
        case "random":
            return RandomAgent(n_features, rng)
    raise InvalidArgumentError(f"unknown agent kind {config.kind!r}")
