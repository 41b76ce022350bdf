"""
Parametric user behavior model: the ground-truth b, l, c, m of every item page history
and the sampled user response to a displayed page.
"""

from typing import Annotated, Literal, NamedTuple, Protocol, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.special import expit, softmax

from shop_sim.config import PRICE_FEATURE
from ssmdp_core.errors import InvalidArgumentError
from ssmdp_core.types import ItemPage, ItemPageHistory


# ==========================================================
# --- Outcomes ---
# ==========================================================
class Purchase(BaseModel):
    """The user buys one item of the displayed page; the session ends with its deal price as reward."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["purchase"] = Field(default="purchase", description="Outcome tag.")
    deal_price: float = Field(ge=0.0, description="Transaction amount of the bought item.")


class Leave(BaseModel):
    """The user abandons the session without buying."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["leave"] = Field(default="leave", description="Outcome tag.")


class Continue(BaseModel):
    """The user asks for the next page."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["continue"] = Field(default="continue", description="Outcome tag.")


Outcome = Annotated[Union[Purchase, Leave, Continue], Field(discriminator="kind")]


class BehaviorProbs(NamedTuple):
    b: float
    l: float
    c: float
    m: float


class BehaviorSource(Protocol):
    """Anything that can play the user side of a session."""

    horizon: int | None

    def probs(self, history: ItemPageHistory) -> BehaviorProbs: ...

    def respond(self, history: ItemPageHistory, rng: np.random.Generator): ...


# ==========================================================
# --- Population model ---
# ==========================================================
class UserBehaviorModel(BaseModel):
    """
    One population's reaction to item pages.

    Page attractiveness u is `attraction_scale` times the mean, over the last `window` pages,
    of the page-mean item score against `preference`. Then b = σ(purchase_gain·u − θ_b),
    l = min(1 − b, base_leave + fatigue·step) and c = 1 − b − l; at step `horizon` c is
    folded into l.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    preference: np.ndarray = Field(description="Latent population preference direction (n-dim).")
    attraction_scale: float = Field(default=8.0, ge=0.0)
    conversion_offset: float = Field(default=0.0, description="θ_b.")
    base_leave: float = Field(default=0.05, ge=0.0, le=1.0)
    fatigue: float = Field(default=0.01, ge=0.0)
    purchase_gain: float = Field(default=1.0, gt=0.0)
    price_scale: float = Field(default=100.0, gt=0.0)
    price_noise: float = Field(default=0.0, ge=0.0)
    window: int = Field(default=4, ge=1)
    horizon: int | None = Field(default=None, ge=1, description="T; continuation is impossible at this step.")

    @field_validator("preference", mode="before")
    @classmethod
    def _as_vector(cls, value):
        preference = np.array(value, dtype=np.float64)
        if preference.ndim != 1:
            raise InvalidArgumentError("preference must be a vector")
        preference.flags.writeable = False
        return preference

    def __eq__(self, other) -> bool:
        if not isinstance(other, UserBehaviorModel):
            return NotImplemented
        return np.array_equal(self.preference, other.preference) and self.model_dump(
            exclude={"preference"}
        ) == other.model_dump(exclude={"preference"})

    def __hash__(self) -> int:
        return hash((self.preference.tobytes(), self.conversion_offset, self.horizon))

    def item_attractiveness(self, page: ItemPage) -> np.ndarray:
        """Softmax weights of the page's items under the preference."""
        return softmax(self.attraction_scale * (page.features @ self.preference))

    def probs(self, history: ItemPageHistory) -> BehaviorProbs:
        return behavior_probs(self, history)

    def respond(self, history: ItemPageHistory, rng: np.random.Generator):
        return user_response(self, history, rng)


def page_attractiveness(model: UserBehaviorModel, history: ItemPageHistory) -> float:
    pages = history.recent_pages(model.window)
    page_means = [float(np.mean(page.features @ model.preference)) for page in pages]
    return model.attraction_scale * float(np.mean(page_means))


def outcome_probs(model: UserBehaviorModel, u: float, step: int) -> tuple[float, float, float]:
    """(b, l, c) for page attractiveness u observed at `step`."""
    b = float(expit(model.purchase_gain * u - model.conversion_offset))
    l = min(1.0 - b, model.base_leave + model.fatigue * step)
    if model.horizon is not None and step >= model.horizon:
        l = 1.0 - b
    c = 1.0 - b - l
    assert abs(b + l + c - 1.0) < 1e-12 and min(b, l, c) >= 0.0, (b, l, c)
    return b, l, c


def behavior_probs(model: UserBehaviorModel, history: ItemPageHistory) -> BehaviorProbs:
    """Ground-truth conversion, abandon and continuing probabilities and expected deal price."""
    if history.step < 1:
        raise InvalidArgumentError("behavior is defined only after at least one page")
    b, l, c = outcome_probs(model, page_attractiveness(model, history), history.step)
    last = history.pages[-1]
    m = model.price_scale * float(model.item_attractiveness(last) @ last.features[:, PRICE_FEATURE])
    return BehaviorProbs(b, l, c, m)


def draw_deal_price(model: UserBehaviorModel, page: ItemPage, rng: np.random.Generator) -> float:
    weights = model.item_attractiveness(page)
    row = rng.choice(len(page), p=weights)
    price = model.price_scale * page.items[row].features[PRICE_FEATURE]
    if model.price_noise > 0.0:
        price *= 1.0 + model.price_noise * rng.standard_normal()
    return max(0.0, float(price))


def user_response(model: UserBehaviorModel, history: ItemPageHistory, rng: np.random.Generator):
    """Sample Purchase / Leave / Continue with the model's (b, l, c)."""
    b, l, _, _ = behavior_probs(model, history)
    draw = rng.random()
    if draw < b:
        return Purchase(deal_price=draw_deal_price(model, history.pages[-1], rng))
    if draw < b + l:
        return Leave()
    return Continue()
