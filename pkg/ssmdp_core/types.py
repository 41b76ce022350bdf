"""
Search session MDP domain types.

Value types are frozen pydantic models. Feature and weight vectors are float64 numpy arrays
marked read-only on construction, so a value shared between sessions cannot be mutated in place.
"""

from enum import Enum
from typing import Annotated, Iterator, Literal, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ssmdp_core.errors import InconsistencyError, InvalidArgumentError


def _frozen_vector(value, name: str) -> np.ndarray:
    vector = np.array(value, dtype=np.float64)
    if vector.ndim != 1:
        raise InvalidArgumentError(f"{name} must be a 1-D vector, got shape {vector.shape}")
    vector.flags.writeable = False
    return vector


# ==========================================================
# --- Items and ranking actions ---
# ==========================================================
class Item(BaseModel):
    """
    An item of the catalog: a unique id and an n-dim vector of normalized attributes.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    id: int = Field(description="Unique item id within a catalog.")
    features: np.ndarray = Field(description="n-dim normalized attribute vector.")

    @field_validator("features", mode="before")
    @classmethod
    def _as_vector(cls, value):
        return _frozen_vector(value, "features")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Item):
            return NotImplemented
        return self.id == other.id and np.array_equal(self.features, other.features)

    def __hash__(self) -> int:
        return hash(self.id)


class RankingAction(BaseModel):
    """
    A ranking action: an n-dim weight vector scoring items by inner product.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    weights: np.ndarray = Field(description="n-dim real weight vector.")

    @field_validator("weights", mode="before")
    @classmethod
    def _as_vector(cls, value):
        weights = _frozen_vector(value, "weights")
        if not np.all(np.isfinite(weights)):
            raise InvalidArgumentError("ranking action weights must be finite")
        return weights

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, RankingAction):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    def __hash__(self) -> int:
        return hash(self.weights.tobytes())


class Catalog:
    """
    An immutable set of items stored column-wise (ids vector, features matrix).

    Pools of remaining items are catalogs too; they share the parent's dimension.
    """

    __slots__ = ("ids", "features", "_rows")

    def __init__(self, ids: Sequence[int] | np.ndarray, features: np.ndarray):
        ids = np.asarray(ids, dtype=np.int64).reshape(-1)
        features = np.array(features, dtype=np.float64, ndmin=2)
        if features.shape[0] != ids.shape[0]:
            raise InvalidArgumentError(
                f"catalog has {ids.shape[0]} ids but {features.shape[0]} feature rows"
            )
        if np.unique(ids).shape[0] != ids.shape[0]:
            raise InvalidArgumentError("item ids must be unique within a catalog")
        ids.flags.writeable = False
        features.flags.writeable = False
        self.ids = ids
        self.features = features
        self._rows = None

    @classmethod
    def from_items(cls, items: Sequence[Item]) -> "Catalog":
        items = list(items)
        if not items:
            raise InvalidArgumentError("a catalog needs at least one item")
        dims = {item.features.shape[0] for item in items}
        if len(dims) != 1:
            raise InvalidArgumentError(f"items disagree on feature dimension: {sorted(dims)}")
        return cls([item.id for item in items], np.stack([item.features for item in items]))

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def rows(self) -> dict[int, int]:
        if self._rows is None:
            self._rows = {int(item_id): row for row, item_id in enumerate(self.ids)}
        return self._rows

    def item(self, item_id: int) -> Item:
        try:
            row = self.rows[int(item_id)]
        except KeyError:
            raise InconsistencyError(f"item {item_id} is not in the catalog") from None
        return Item(id=int(item_id), features=self.features[row])

    def subset(self, mask: np.ndarray) -> "Catalog":
        return Catalog(self.ids[mask], self.features[mask])

    def __len__(self) -> int:
        return self.ids.shape[0]

    def __iter__(self) -> Iterator[Item]:
        for row, item_id in enumerate(self.ids):
            yield Item(id=int(item_id), features=self.features[row])

    def __contains__(self, item) -> bool:
        item_id = item.id if isinstance(item, Item) else item
        return int(item_id) in self.rows


# ==========================================================
# --- Item pages and histories ---
# ==========================================================
class ItemPage(BaseModel):
    """
    The top-K list displayed at one decision step.
    """
    model_config = ConfigDict(frozen=True)

    items: tuple[Item, ...] = Field(description="Displayed items, best-scored first.")
    step: int = Field(ge=1, description="Decision step that produced this page, starting at 1.")

    @field_validator("items")
    @classmethod
    def _no_duplicates(cls, items):
        ids = [item.id for item in items]
        if len(set(ids)) != len(ids):
            raise InvalidArgumentError(f"page repeats item ids: {ids}")
        return items

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(item.id for item in self.items)

    @property
    def features(self) -> np.ndarray:
        return np.stack([item.features for item in self.items])

    def __len__(self) -> int:
        return len(self.items)


class ItemPageHistory(BaseModel):
    """
    The query plus every page displayed so far. Histories are values: extending one
    returns a new history.
    """
    model_config = ConfigDict(frozen=True)

    query: int | str = Field(default=0, description="Opaque query identifier.")
    pages: tuple[ItemPage, ...] = Field(default=(), description="Pages in display order.")

    @model_validator(mode="after")
    def _consecutive_and_disjoint(self):
        seen: set[int] = set()
        for index, page in enumerate(self.pages, start=1):
            if page.step != index:
                raise InvalidArgumentError(f"page at position {index} carries step {page.step}")
            overlap = seen.intersection(page.ids)
            if overlap:
                raise InvalidArgumentError(f"items {sorted(overlap)} displayed twice")
            seen.update(page.ids)
        return self

    @property
    def step(self) -> int:
        return len(self.pages)

    @property
    def displayed_ids(self) -> frozenset[int]:
        return frozenset(item_id for page in self.pages for item_id in page.ids)

    def recent_pages(self, window: int) -> tuple[ItemPage, ...]:
        """Most recent `window` pages, newest first."""
        return tuple(reversed(self.pages[-window:])) if window > 0 else ()


# ==========================================================
# --- Session states ---
# ==========================================================
class Continuation(BaseModel):
    """C(h): the user keeps browsing after observing h."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["continuation"] = "continuation"
    history: ItemPageHistory

    @property
    def is_terminal(self) -> bool:
        return False


class Conversion(BaseModel):
    """B(h): the user bought an item after observing h."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["conversion"] = "conversion"
    history: ItemPageHistory
    deal_price: float = Field(ge=0.0, description="Realized transaction amount.")

    @model_validator(mode="after")
    def _has_pages(self):
        if self.history.step < 1:
            raise InvalidArgumentError("a conversion needs at least one displayed page")
        return self

    @property
    def is_terminal(self) -> bool:
        return True


class Abandon(BaseModel):
    """L(h): the user left after observing h."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["abandon"] = "abandon"
    history: ItemPageHistory

    @model_validator(mode="after")
    def _has_pages(self):
        if self.history.step < 1:
            raise InvalidArgumentError("an abandon needs at least one displayed page")
        return self

    @property
    def is_terminal(self) -> bool:
        return True


SessionState = Annotated[Union[Continuation, Conversion, Abandon], Field(discriminator="kind")]


class TransitionSample(BaseModel):
    """
    One step (s_k, a_k, r_k, s_{k+1}) of a session together with the history h_{k+1}.
    """
    model_config = ConfigDict(frozen=True)

    state: Continuation
    action: RankingAction
    reward: float
    next_state: SessionState
    next_history: ItemPageHistory

    @model_validator(mode="after")
    def _consistent(self):
        expected = self.next_state.deal_price if isinstance(self.next_state, Conversion) else 0.0
        if self.reward != expected:
            raise InvalidArgumentError("reward must be the deal price on conversions and zero otherwise")
        if self.next_history.step != self.state.history.step + 1:
            raise InvalidArgumentError("next history must extend the state's history by one page")
        if self.next_history.pages[:-1] != self.state.history.pages:
            raise InvalidArgumentError("next history does not extend the state's history")
        return self


class TerminalKind(str, Enum):
    CONVERSION = "conversion"
    ABANDON = "abandon"
    TRUNCATED = "truncated"


# ==========================================================
# --- Tabular instances ---
# ==========================================================
class TabularSSMDP(BaseModel):
    """
    Per-step outcome probabilities of the single chain of states a fixed policy visits.

    Index t-1 of each tuple holds the value at decision step t (b_t, c_t, m_t); l_t is derived.
    """
    model_config = ConfigDict(frozen=True)

    T: int = Field(ge=1, description="Maximal decision step.")
    b: tuple[float, ...] = Field(description="Conversion probability per step.")
    c: tuple[float, ...] = Field(description="Continuing probability per step.")
    m: tuple[float, ...] = Field(description="Expected deal price per step.")

    @model_validator(mode="after")
    def _valid_chain(self):
        for name in ("b", "c", "m"):
            if len(getattr(self, name)) != self.T:
                raise InvalidArgumentError(f"{name} must hold exactly T={self.T} values")
        for t, (b, c, m) in enumerate(zip(self.b, self.c, self.m), start=1):
            if not (0.0 <= b <= 1.0 and 0.0 <= c <= 1.0):
                raise InvalidArgumentError(f"step {t}: probabilities must lie in [0, 1]")
            if b + c > 1.0 + 1e-12:
                raise InvalidArgumentError(f"step {t}: b + c exceeds 1")
            if m < 0.0:
                raise InvalidArgumentError(f"step {t}: expected deal price must be nonnegative")
        if self.c[-1] != 0.0:
            raise InvalidArgumentError("the session cannot continue past step T (c_T must be 0)")
        return self

    @property
    def l(self) -> tuple[float, ...]:
        return tuple(max(0.0, 1.0 - b - c) for b, c in zip(self.b, self.c))
