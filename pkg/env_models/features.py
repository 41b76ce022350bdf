"""
Fixed-width feature map of item page histories, shared by the outcome/price estimators and
(with a query slot in front) by the agents' state encoder.
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ssmdp_core.errors import InvalidArgumentError
from ssmdp_core.ranking import max_steps
from ssmdp_core.types import Catalog, ItemPage, ItemPageHistory

# features of one history; see HistoryEncoder.dim for the layout
HistoryFeatures = np.ndarray


class CatalogStats(BaseModel):
    """Per-feature standardization constants and the horizon used to normalize step indices."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mean: np.ndarray
    std: np.ndarray
    horizon: int = Field(ge=1)
    window: int = Field(default=4, ge=1)

    @field_validator("mean", "std", mode="before")
    @classmethod
    def _as_vector(cls, value):
        vector = np.array(value, dtype=np.float64)
        vector.flags.writeable = False
        return vector

    @classmethod
    def from_catalog(cls, catalog: Catalog, K: int, window: int = 4) -> "CatalogStats":
        std = catalog.features.std(axis=0)
        return cls(
            mean=catalog.features.mean(axis=0),
            std=np.where(std > 1e-12, std, 1.0),
            horizon=max_steps(len(catalog), K),
            window=window,
        )

    @property
    def n_features(self) -> int:
        return self.mean.shape[0]


def position_weights(length: int) -> np.ndarray:
    """Logarithmic rank discount, normalized to sum to one."""
    weights = 1.0 / np.log2(np.arange(length) + 2.0)
    return weights / weights.sum()


def page_block(page: ItemPage, stats: CatalogStats) -> np.ndarray:
    """Standardized mean item features, their rank-discounted mean and their per-feature max."""
    standardized = (page.features - stats.mean) / stats.std
    return np.concatenate(
        (standardized.mean(axis=0), position_weights(len(page)) @ standardized, standardized.max(axis=0))
    )


class HistoryEncoder:
    """
    Layout: `window` page blocks (newest first, zero-padded when the history is shorter),
    then step/T and the fraction of the window that holds pages.
    """

    def __init__(self, stats: CatalogStats):
        self.stats = stats
        self.block = 3 * stats.n_features

    @property
    def dim(self) -> int:
        return self.stats.window * self.block + 2

    def encode(self, history: ItemPageHistory) -> HistoryFeatures:
        out = np.zeros(self.dim)
        recent = history.recent_pages(self.stats.window)
        for slot, page in enumerate(recent):
            out[slot * self.block:(slot + 1) * self.block] = page_block(page, self.stats)
        out[-2] = history.step / self.stats.horizon
        out[-1] = len(recent) / self.stats.window
        return out

    def __call__(self, history: ItemPageHistory) -> HistoryFeatures:
        if history.step < 1:
            raise InvalidArgumentError("history features need at least one displayed page")
        return self.encode(history)


def featurize_history(history: ItemPageHistory, context: CatalogStats) -> HistoryFeatures:
    return HistoryEncoder(context)(history)
