"""
Cascade click simulator: the user scans a page top-down and clicks the first attractive item.

Only the bandit baselines consume clicks; session rewards stay purchase-only.
"""

import numpy as np
from scipy.special import expit

from ssmdp_core.types import Catalog, ItemPage


class CascadeClickModel:
    """Per-item attraction probabilities keyed by item id."""

    def __init__(self, attraction: dict[int, float]):
        self.attraction = {int(item_id): float(p) for item_id, p in attraction.items()}

    @classmethod
    def from_catalog(cls, catalog: Catalog, preference: np.ndarray, click_gain: float, click_offset: float):
        """Attraction σ(click_gain·(x·preference) − click_offset) for every catalog item."""
        probs = expit(click_gain * (catalog.features @ preference) - click_offset)
        return cls(dict(zip(catalog.ids.tolist(), probs.tolist())))

    def probabilities(self, item_ids) -> np.ndarray:
        return np.array([self.attraction[int(item_id)] for item_id in item_ids])

    def simulate(self, page: ItemPage, rng: np.random.Generator) -> int | None:
        return cascade_click(self, page, rng)

    def click_probability(self, item_ids) -> float:
        """Probability that a list gets a click under the cascade model."""
        return float(1.0 - np.prod(1.0 - self.probabilities(item_ids)))


def cascade_click(model: CascadeClickModel, page: ItemPage, rng: np.random.Generator) -> int | None:
    """0-based position of the click, or None when the user examined the page without clicking."""
    draws = rng.random(len(page)) < model.probabilities(page.ids)
    hits = np.flatnonzero(draws)
    return int(hits[0]) if hits.size else None
