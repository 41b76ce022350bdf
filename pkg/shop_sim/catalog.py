import numpy as np
from scipy.stats import truncnorm

from shop_sim.config import CatalogConfig
from ssmdp_core.types import Catalog


def sample_catalog(config: CatalogConfig, rng: np.random.Generator | None = None) -> Catalog:
    """
    Draw `catalog_size` items with i.i.d. truncated-normal features on [0, 1].

    Per-feature location/scale come from `config.seed`; the draws themselves come from `rng`
    (a fresh stream on `config.seed` when omitted), so the catalog is a function of the seeds.
    """
    if rng is None:
        rng = np.random.default_rng([config.seed, 1])
    loc, scale = config.feature_distribution()
    a, b = config.feature_bounds()
    features = truncnorm.rvs(
        a, b, loc=loc, scale=scale,
        size=(config.catalog_size, config.n_features),
        random_state=rng,
    )
    return Catalog(np.arange(config.catalog_size), np.clip(features, 0.0, 1.0))
