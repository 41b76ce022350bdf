"""
Configuration models for the synthetic shopping simulator.
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.stats import truncnorm

PRICE_FEATURE = 0
QUALITY_FEATURE = 1


class CatalogConfig(BaseModel):
    """
    Shape of the item catalog and the seed fixing its per-feature distributions.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_features: int = Field(default=20, ge=2, description="Item/action dimension n; feature 0 is price, 1 is quality.")
    catalog_size: int = Field(default=1000, ge=1, description="Number of items |D|.")
    K: int = Field(default=10, ge=1, description="Items per page.")
    seed: int = Field(default=7, ge=0, lt=2**64, description="Seed fixing per-feature means and spreads.")
    mean_range: tuple[float, float] = Field(default=(0.3, 0.7), description="Range of per-feature location parameters.")
    spread_range: tuple[float, float] = Field(default=(0.1, 0.25), description="Range of per-feature scale parameters.")

    def feature_distribution(self) -> tuple[np.ndarray, np.ndarray]:
        """Location and scale of each feature's bell curve before truncation to [0, 1]."""
        rng = np.random.default_rng([self.seed, 0])
        loc = rng.uniform(*self.mean_range, size=self.n_features)
        scale = rng.uniform(*self.spread_range, size=self.n_features)
        return loc, scale

    def feature_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        loc, scale = self.feature_distribution()
        return (0.0 - loc) / scale, (1.0 - loc) / scale

    def feature_means(self) -> np.ndarray:
        """Exact mean of each truncated feature distribution."""
        loc, scale = self.feature_distribution()
        a, b = self.feature_bounds()
        return truncnorm.mean(a, b, loc=loc, scale=scale)


class BehaviorConfig(BaseModel):
    """
    Scalar parameters of the population behavior model. The preference direction is drawn
    from the model seed; the conversion offset is calibrated unless given.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    attraction_scale: float = Field(default=8.0, ge=0.0, description="Multiplier on page-to-preference match.")
    purchase_gain: float = Field(default=1.0, gt=0.0, description="Slope of the conversion logistic.")
    conversion_offset: float | None = Field(default=None, description="θ_b; calibrated to `target_conversion` when unset.")
    target_conversion: float = Field(default=0.05, gt=0.0, lt=1.0, description="Session conversion rate of a uniform-random policy.")
    base_leave: float = Field(default=0.05, ge=0.0, le=1.0, description="Leave probability at step 0.")
    fatigue: float = Field(default=0.01, ge=0.0, description="Additive leave pressure per step.")
    price_scale: float = Field(default=100.0, gt=0.0, description="Currency units per unit of the price feature.")
    price_noise: float = Field(default=0.1, ge=0.0, description="Multiplicative deal-price noise magnitude.")
    price_preference: float = Field(default=-0.3, description="Preference weight on the price feature before normalization.")
    quality_preference: float = Field(default=0.6, description="Preference weight on the quality feature before normalization.")
    window: int = Field(default=4, ge=1, description="Number of recent pages the user reacts to.")
    click_gain: float = Field(default=6.0, ge=0.0, description="Slope of the per-item click logistic.")
    click_offset: float = Field(default=2.0, description="Offset of the per-item click logistic.")
    calibration_paths: int = Field(default=400, ge=1, description="Random-policy paths used to calibrate θ_b.")
