"""
The search session loop: rank, display, observe the user, repeat.
"""

from typing import Callable, Protocol

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from shop_sim.behavior import BehaviorSource, Continue, Purchase
from shop_sim.clicks import CascadeClickModel, cascade_click
from ssmdp_core.errors import InvalidArgumentError
from ssmdp_core.ranking import advance_history, remaining_items, reward, top_k_list
from ssmdp_core.types import (
    Abandon,
    Catalog,
    Continuation,
    Conversion,
    ItemPage,
    ItemPageHistory,
    RankingAction,
    TerminalKind,
    TransitionSample,
)


class SessionPolicy(Protocol):
    """Produces the action and the displayed page for a continuation state."""

    def rank(self, state: Continuation, pool: Catalog, K: int) -> tuple[RankingAction, ItemPage]: ...


class ActionPolicy:
    """Adapts a plain `state -> RankingAction` function to a session policy via top-K ranking."""

    def __init__(self, act: Callable[[Continuation], RankingAction]):
        self.act = act

    def rank(self, state: Continuation, pool: Catalog, K: int) -> tuple[RankingAction, ItemPage]:
        action = self.act(state)
        if not isinstance(action, RankingAction):
            action = RankingAction(weights=action)
        if action.dim != pool.n_features:
            raise InvalidArgumentError(
                f"policy returned a {action.dim}-dim action for {pool.n_features}-dim items"
            )
        return action, top_k_list(pool, action, K, step=state.history.step + 1)


def as_session_policy(policy) -> SessionPolicy:
    return policy if hasattr(policy, "rank") else ActionPolicy(policy)


class SessionTrajectory(BaseModel):
    """
    Every transition of one session, plus how it ended.
    """
    model_config = ConfigDict(frozen=True)

    samples: tuple[TransitionSample, ...] = Field(description="One sample per decision step.")
    final_step: int = Field(ge=1, description="Index t of the last displayed page.")
    terminal_kind: TerminalKind
    clicks: tuple[int | None, ...] = Field(default=(), description="Cascade click position per page, when simulated.")

    @model_validator(mode="after")
    def _chained(self):
        for previous, current in zip(self.samples, self.samples[1:]):
            if previous.next_state != current.state:
                raise InvalidArgumentError("consecutive samples are not chained")
        if any(sample.reward != 0.0 for sample in self.samples[:-1]):
            raise InvalidArgumentError("only the last sample may carry a reward")
        return self

    @property
    def transaction_amount(self) -> float:
        return sum(sample.reward for sample in self.samples)

    def __len__(self) -> int:
        return len(self.samples)


def run_session(
    catalog: Catalog,
    behavior: BehaviorSource,
    policy,
    K: int,
    rng: np.random.Generator,
    click_model: CascadeClickModel | None = None,
    query: int | str = 0,
) -> SessionTrajectory:
    """
    Play one session from h_0 = query until a purchase, a leave, or an exhausted catalog.
    """
    policy = as_session_policy(policy)
    history = ItemPageHistory(query=query)
    state = Continuation(history=history)
    samples: list[TransitionSample] = []
    clicks: list[int | None] = []

    while True:
        pool = remaining_items(catalog, history)
        action, page = policy.rank(state, pool, K)
        history = advance_history(history, page)
        if click_model is not None:
            clicks.append(cascade_click(click_model, page, rng))
        outcome = behavior.respond(history, rng)
        exhausted = len(pool) <= len(page)

        if isinstance(outcome, Purchase):
            next_state, kind = Conversion(history=history, deal_price=outcome.deal_price), TerminalKind.CONVERSION
        elif isinstance(outcome, Continue) and not exhausted:
            next_state, kind = Continuation(history=history), None
        elif isinstance(outcome, Continue):
            next_state, kind = Abandon(history=history), TerminalKind.TRUNCATED
        else:
            next_state, kind = Abandon(history=history), TerminalKind.ABANDON

        samples.append(TransitionSample(
            state=state,
            action=action,
            reward=reward(state, action, next_state),
            next_state=next_state,
            next_history=history,
        ))
        if kind is not None:
            return SessionTrajectory(
                samples=tuple(samples),
                final_step=history.step,
                terminal_kind=kind,
                clicks=tuple(clicks),
            )
        state = next_state
