"""
Ranking, transition and reward semantics of the search session MDP.
"""

import math

import numpy as np

from ssmdp_core.errors import InconsistencyError, InvalidArgumentError
from ssmdp_core.types import (
    Catalog,
    Continuation,
    Conversion,
    Item,
    ItemPage,
    ItemPageHistory,
    RankingAction,
)


def _check_dimension(n_features: int, action: RankingAction):
    if action.dim != n_features:
        raise InvalidArgumentError(
            f"action has dimension {action.dim} but items have dimension {n_features}"
        )


def score(item: Item, action: RankingAction) -> float:
    """Ranking score of an item: inner product of its features with the action weights."""
    _check_dimension(item.features.shape[0], action)
    return float(item.features @ action.weights)


def rank_order(ids: np.ndarray, scores: np.ndarray) -> np.ndarray:
    """Row order by descending score, ties broken by ascending item id."""
    return np.lexsort((ids, -scores))


def top_k_list(pool: Catalog, action: RankingAction, K: int, step: int = 1) -> ItemPage:
    """
    The top-K list of the pool under the action, as the page displayed at `step`.

    Holds min(K, |pool|) items in strictly descending score order; equal scores go to the
    smaller item id first.
    """
    if len(pool) == 0:
        raise InvalidArgumentError("cannot rank an empty pool")
    if K < 1:
        raise InvalidArgumentError(f"K must be at least 1, got {K}")
    _check_dimension(pool.n_features, action)
    order = rank_order(pool.ids, pool.features @ action.weights)[:K]
    items = tuple(Item(id=int(pool.ids[row]), features=pool.features[row]) for row in order)
    return ItemPage(items=items, step=step)


def remaining_items(catalog: Catalog, history: ItemPageHistory) -> Catalog:
    """D_t: the catalog minus every item displayed in the history."""
    displayed = history.displayed_ids
    if not displayed:
        return catalog
    unknown = [item_id for item_id in displayed if item_id not in catalog.rows]
    if unknown:
        raise InconsistencyError(f"history displays items outside the catalog: {sorted(unknown)}")
    mask = ~np.isin(catalog.ids, np.fromiter(displayed, dtype=np.int64, count=len(displayed)))
    return catalog.subset(mask)


def advance_history(history: ItemPageHistory, page: ItemPage) -> ItemPageHistory:
    """h_t = h_{t-1} ∪ {p_t}; the input history is left untouched."""
    if page.step != history.step + 1:
        raise InvalidArgumentError(
            f"page step {page.step} does not follow history step {history.step}"
        )
    repeated = history.displayed_ids.intersection(page.ids)
    if repeated:
        raise InvalidArgumentError(f"items {sorted(repeated)} were already displayed")
    # validated pieces; skip re-running the whole-history check
    return ItemPageHistory.model_construct(query=history.query, pages=history.pages + (page,))


def max_steps(catalog_size: int, K: int) -> int:
    """T = ceil(|D| / K)."""
    if catalog_size < 1 or K < 1:
        raise InvalidArgumentError("catalog size and K must both be at least 1")
    return math.ceil(catalog_size / K)


def reward(state, action: RankingAction, next_state) -> float:
    """Immediate reward: the deal price on a conversion, zero otherwise."""
    if not isinstance(state, Continuation):
        raise InvalidArgumentError(f"no action can be taken in a terminal {state.kind} state")
    if isinstance(next_state, Conversion):
        return float(next_state.deal_price)
    return 0.0
