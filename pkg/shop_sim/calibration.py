"""
Building the population model of an experiment, including calibration of the conversion
offset θ_b against the conversion rate of a uniform-random ranking policy.
"""

import logfire
import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from shop_sim.behavior import UserBehaviorModel, page_attractiveness
from shop_sim.config import PRICE_FEATURE, QUALITY_FEATURE, BehaviorConfig
from ssmdp_core.ranking import advance_history, max_steps, remaining_items, top_k_list
from ssmdp_core.types import Catalog, ItemPageHistory, RankingAction


def draw_preference(n_features: int, config: BehaviorConfig, rng: np.random.Generator) -> np.ndarray:
    preference = rng.normal(0.0, 1.0 / np.sqrt(n_features), size=n_features)
    preference[PRICE_FEATURE] = config.price_preference
    preference[QUALITY_FEATURE] = config.quality_preference
    return preference / np.linalg.norm(preference)


def random_path_attractiveness(
    catalog: Catalog, model: UserBehaviorModel, K: int, rng: np.random.Generator
) -> np.ndarray:
    """Page attractiveness u_t along the continuation path of one uniform-random-action session."""
    history = ItemPageHistory()
    values = []
    while True:
        pool = remaining_items(catalog, history)
        action = RankingAction(weights=rng.uniform(-1.0, 1.0, size=catalog.n_features))
        page = top_k_list(pool, action, K, step=history.step + 1)
        history = advance_history(history, page)
        values.append(page_attractiveness(model, history))
        if len(pool) <= len(page):
            return np.array(values)


def expected_conversion_rate(model: UserBehaviorModel, paths: list[np.ndarray], offset: float) -> float:
    """Mean over paths of the probability that the session ends in a purchase."""
    rates = []
    for u in paths:
        steps = np.arange(1, u.shape[0] + 1)
        b = expit(model.purchase_gain * u - offset)
        l = np.minimum(1.0 - b, model.base_leave + model.fatigue * steps)
        c = 1.0 - b - l
        c[-1] = 0.0
        reach = np.concatenate(([1.0], np.cumprod(c[:-1])))
        rates.append(float(np.sum(reach * b)))
    return float(np.mean(rates))


def calibrate_conversion_offset(
    catalog: Catalog,
    model: UserBehaviorModel,
    K: int,
    target: float,
    rng: np.random.Generator,
    n_paths: int = 400,
) -> float:
    """θ_b such that the uniform-random policy converts a `target` fraction of sessions."""
    with logfire.span("calibrate conversion offset target={target}", target=target):
        paths = [random_path_attractiveness(catalog, model, K, rng) for _ in range(n_paths)]
        offset = brentq(
            lambda theta: expected_conversion_rate(model, paths, theta) - target,
            -60.0, 60.0, xtol=1e-10,
        )
        logfire.info("calibrated conversion offset {offset}", offset=offset)
        return float(offset)


def build_behavior_model(
    config: BehaviorConfig, catalog: Catalog, K: int, rng: np.random.Generator
) -> UserBehaviorModel:
    """The experiment's population model: preference from `rng`, θ_b given or calibrated."""
    model = UserBehaviorModel(
        preference=draw_preference(catalog.n_features, config, rng),
        attraction_scale=config.attraction_scale,
        base_leave=config.base_leave,
        fatigue=config.fatigue,
        purchase_gain=config.purchase_gain,
        price_scale=config.price_scale,
        price_noise=config.price_noise,
        window=config.window,
        horizon=max_steps(len(catalog), K),
    )
    if config.conversion_offset is not None:
        return model.model_copy(update={"conversion_offset": config.conversion_offset})
    offset = calibrate_conversion_offset(catalog, model, K, config.target_conversion, rng, config.calibration_paths)
    return model.model_copy(update={"conversion_offset": offset})
