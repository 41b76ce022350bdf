"""
Online learning-to-rank bandit baselines fed by cascade clicks: CascadeUCB1, CascadeKL-UCB and
RankedExp3. They rank pages directly from per-item statistics, so their transition samples
carry a zero ranking action.
"""

from typing import Literal, NamedTuple

import numpy as np
from scipy.special import rel_entr, softmax

from agents.base import Agent
from neural.params import load_in_place
from shop_sim.session import SessionTrajectory
from ssmdp_core.errors import InconsistencyError, InvalidArgumentError
from ssmdp_core.ranking import rank_order
from ssmdp_core.types import Catalog, Continuation, Item, ItemPage, RankingAction

UcbVariant = Literal["ucb1", "kl"]


def _page(pool: Catalog, rows: np.ndarray, step: int) -> ItemPage:
    items = tuple(Item(id=int(pool.ids[row]), features=pool.features[row]) for row in rows)
    return ItemPage(items=items, step=step)


# ==========================================================
# --- Cascade UCB ---
# ==========================================================

class CascadeUcbState:
    """Pull counts and empirical click means per item id, plus the round counter."""

    def __init__(self, n_items: int):
        self.pulls = np.zeros(n_items)
        self.means = np.zeros(n_items)
        self.rounds = np.zeros(1)

    @property
    def t(self) -> int:
        """Index of the next round, starting at 1."""
        return int(self.rounds[0]) + 1

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {"pulls": self.pulls, "means": self.means, "rounds": self.rounds}

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        load_in_place(self.state_arrays(), arrays, "cascade_ucb")


def bernoulli_kl(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return rel_entr(p, q) + rel_entr(1.0 - p, 1.0 - q)


def kl_upper_bound(means: np.ndarray, pulls: np.ndarray, t: int, iterations: int = 50) -> np.ndarray:
    """Largest q >= mean with pulls·kl(mean, q) <= ln t + 3 ln ln t, by bisection."""
    log_t = np.log(t)
    budget = (log_t + 3.0 * np.log(max(log_t, 1.0))) / pulls
    low = means.copy()
    high = np.ones_like(means)
    for _ in range(iterations):
        mid = (low + high) / 2.0
        inside = bernoulli_kl(means, mid) <= budget
        low = np.where(inside, mid, low)
        high = np.where(inside, high, mid)
    return low


def ucb_indices(state: CascadeUcbState, ids: np.ndarray, t: int, variant: UcbVariant = "ucb1") -> np.ndarray:
    """Upper confidence index per item id; never-pulled items get +inf."""
    pulls = state.pulls[ids]
    means = state.means[ids]
    indices = np.full(ids.shape[0], np.inf)
    seen = pulls > 0
    if variant == "ucb1":
        indices[seen] = means[seen] + np.sqrt(1.5 * np.log(t) / pulls[seen])
    elif variant == "kl":
        indices[seen] = kl_upper_bound(means[seen], pulls[seen], t)
    else:
        raise InvalidArgumentError(f"unknown UCB variant {variant!r}")
    return indices


def cascade_ucb_rank(
    state: CascadeUcbState,
    pool: Catalog,
    K: int,
    t: int,
    variant: UcbVariant = "ucb1",
    step: int = 1,
) -> ItemPage:
    """The K pool items with the largest indices, ties to the smaller id."""
    if t < 1:
        raise InvalidArgumentError(f"round index t must be at least 1, got {t}")
    if K < 1 or len(pool) == 0:
        raise InvalidArgumentError("need K >= 1 and a nonempty pool")
    indices = ucb_indices(state, pool.ids, t, variant)
    return _page(pool, rank_order(pool.ids, indices)[:K], step)


def cascade_update(state: CascadeUcbState, page: ItemPage, click_position: int | None) -> CascadeUcbState:
    """
    Items above the click are updated with reward 0, the clicked item with reward 1; items
    below it were not examined. Without a click every shown item gets reward 0.
    """
    if click_position is not None and not 0 <= click_position < len(page):
        raise InvalidArgumentError(f"click position {click_position} is outside a page of {len(page)} items")
    ids = np.array(page.ids)
    if click_position is None:
        examined, rewards = ids, np.zeros(len(ids))
    else:
        examined = ids[:click_position + 1]
        rewards = np.zeros(click_position + 1)
        rewards[-1] = 1.0
    state.pulls[examined] += 1.0
    state.means[examined] += (rewards - state.means[examined]) / state.pulls[examined]
    state.rounds += 1.0
    return state


# ==========================================================
# --- RankedExp3 ---
# ==========================================================

class RankedExp3State:
    """Per-position log-weights over item ids; rows are kept with a maximum of zero."""

    def __init__(self, n_items: int, K: int, mixing: float = 0.1):
        if not 0.0 <= mixing <= 1.0:
            raise InvalidArgumentError(f"mixing must lie in [0, 1], got {mixing}")
        self.log_weights = np.zeros((K, n_items))
        self.mixing = mixing

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {"log_weights": self.log_weights}

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        load_in_place(self.state_arrays(), arrays, "ranked_exp3")


class RankedDraw(NamedTuple):
    """A sampled page with, per position, the probability of its item and the number of candidates."""

    page: ItemPage
    probabilities: np.ndarray
    candidates: np.ndarray


def position_distribution(state: RankedExp3State, position: int, candidates: np.ndarray) -> np.ndarray:
    """(1 − γ)·softmax(log-weights) + γ/|candidates| over the candidate ids."""
    exploit = softmax(state.log_weights[position, candidates])
    return (1.0 - state.mixing) * exploit + state.mixing / candidates.shape[0]


def ranked_exp3_rank(
    state: RankedExp3State, pool: Catalog, K: int, rng: np.random.Generator, step: int = 1
) -> RankedDraw:
    """Each position samples one of the pool items not taken by the positions above it."""
    if len(pool) == 0:
        raise InvalidArgumentError("cannot rank an empty pool")
    length = min(K, len(pool), state.log_weights.shape[0])
    available = np.ones(len(pool), dtype=bool)
    rows, probabilities, candidates = [], np.zeros(length), np.zeros(length)
    for position in range(length):
        open_rows = np.flatnonzero(available)
        p = position_distribution(state, position, pool.ids[open_rows])
        pick = rng.choice(open_rows.shape[0], p=p)
        rows.append(open_rows[pick])
        probabilities[position] = p[pick]
        candidates[position] = open_rows.shape[0]
        available[open_rows[pick]] = False
    return RankedDraw(_page(pool, np.array(rows), step), probabilities, candidates)


def ranked_exp3_update(state: RankedExp3State, draw: RankedDraw, click_position: int | None) -> RankedExp3State:
    """
    Importance-weighted exponential update per position: reward 1 at the clicked position,
    0 elsewhere (clipped to [0, 1]).
    """
    if click_position is not None and not 0 <= click_position < len(draw.page):
        raise InvalidArgumentError(f"click position {click_position} is outside a page of {len(draw.page)} items")
    for position, item_id in enumerate(draw.page.ids):
        gain = 1.0 if position == click_position else 0.0
        estimate = min(max(gain, 0.0), 1.0) / draw.probabilities[position]
        state.log_weights[position, item_id] += state.mixing * estimate / draw.candidates[position]
    state.log_weights -= state.log_weights.max(axis=1, keepdims=True)
    return state


# ==========================================================
# --- Session agents ---
# ==========================================================

class _ClickFedAgent(Agent):
    def __init__(self, n_features: int, rng: np.random.Generator):
        super().__init__(rng)
        self.zero_action = RankingAction(weights=np.zeros(n_features))

    def clicks(self, trajectory: SessionTrajectory):
        if len(trajectory.clicks) != len(trajectory.samples):
            raise InconsistencyError("bandit agents learn from sessions simulated with a click model")
        return zip(trajectory.samples, trajectory.clicks)


class CascadeUcbAgent(_ClickFedAgent):
    def __init__(self, n_items: int, n_features: int, variant: UcbVariant, rng: np.random.Generator):
        super().__init__(n_features, rng)
        self.variant = variant
        self.kind = "cascade_ucb1" if variant == "ucb1" else "cascade_klucb"
        self.state = CascadeUcbState(n_items)

    def rank(self, state: Continuation, pool: Catalog, K: int) -> tuple[RankingAction, ItemPage]:
        page = cascade_ucb_rank(self.state, pool, K, self.state.t, self.variant, step=state.history.step + 1)
        return self.zero_action, page

    def learn(self, trajectory: SessionTrajectory) -> None:
        for sample, click in self.clicks(trajectory):
            cascade_update(self.state, sample.next_history.pages[-1], click)

    def components(self) -> dict[str, object]:
        return {"bandit": self.state}


class RankedExp3Agent(_ClickFedAgent):
    kind = "ranked_exp3"

    def __init__(self, n_items: int, K: int, n_features: int, mixing: float, rng: np.random.Generator):
        super().__init__(n_features, rng)
        self.state = RankedExp3State(n_items, K, mixing)
        self.draws: list[RankedDraw] = []

    def rank(self, state: Continuation, pool: Catalog, K: int) -> tuple[RankingAction, ItemPage]:
        if state.history.step == 0:
            self.draws = []
        draw = ranked_exp3_rank(self.state, pool, K, self.rng, step=state.history.step + 1)
        self.draws.append(draw)
        return self.zero_action, draw.page

    def learn(self, trajectory: SessionTrajectory) -> None:
        for (sample, click), draw in zip(self.clicks(trajectory), self.draws):
            if draw.page != sample.next_history.pages[-1]:
                raise InconsistencyError("trajectory pages do not match the pages this agent drew")
            ranked_exp3_update(self.state, draw, click)
        self.draws = []

    def components(self) -> dict[str, object]:
        return {"bandit": self.state}
