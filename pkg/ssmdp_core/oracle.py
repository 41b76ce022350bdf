"""
Exact enumeration oracle for tabular SSMDP instances.

All three quantities are evaluated along the single chain C_0 -> C_1 -> ... of continuation
states of a fixed policy. Step t of the chain converts with b_t (deal price m_t) and continues
with c_t.
"""

import numpy as np

from ssmdp_core.errors import InvalidArgumentError
from ssmdp_core.types import TabularSSMDP


def _reaching(c: np.ndarray) -> np.ndarray:
    """reach[k] = probability of reaching step k+1 from step 1 (product of earlier c)."""
    return np.concatenate(([1.0], np.cumprod(c[:-1])))


def oracle_gmv(mdp: TabularSSMDP) -> float:
    """Expected gross merchandise volume of one session."""
    b, c, m = (np.asarray(x, dtype=np.float64) for x in (mdp.b, mdp.c, mdp.m))
    return float(np.sum(_reaching(c) * b * m))


def oracle_value(mdp: TabularSSMDP, gamma: float, from_step: int = 0) -> float:
    """Discounted value V_γ of the continuation state at `from_step`."""
    if not 0.0 <= gamma <= 1.0:
        raise InvalidArgumentError(f"gamma must lie in [0, 1], got {gamma}")
    if not 0 <= from_step < mdp.T:
        raise InvalidArgumentError(f"from_step must lie in [0, {mdp.T}), got {from_step}")
    b, c, m = (np.asarray(x, dtype=np.float64)[from_step:] for x in (mdp.b, mdp.c, mdp.m))
    discounts = gamma ** np.arange(b.shape[0], dtype=np.float64)
    return float(np.sum(discounts * _reaching(c) * b * m))


def oracle_q(mdp: TabularSSMDP, step: int, gamma: float = 1.0) -> float:
    """
    Q of the fixed policy's action at the continuation state of `step`, by backward recursion
    Q_t = b_{t+1} m_{t+1} + γ c_{t+1} Q_{t+1}, with Q_T = 0.
    """
    if not 0.0 <= gamma <= 1.0:
        raise InvalidArgumentError(f"gamma must lie in [0, 1], got {gamma}")
    if not 0 <= step <= mdp.T:
        raise InvalidArgumentError(f"step must lie in [0, {mdp.T}], got {step}")
    q = 0.0
    for t in range(mdp.T - 1, step - 1, -1):
        q = mdp.b[t] * mdp.m[t] + gamma * mdp.c[t] * q
    return float(q)


def random_tabular_ssmdp(rng: np.random.Generator, T: int, price_range=(1.0, 50.0)) -> TabularSSMDP:
    """A random valid instance: per-step (b, l, c) from a flat Dirichlet, c_T folded into l_T."""
    probs = rng.dirichlet(np.ones(3), size=T)
    b = probs[:, 0]
    c = probs[:, 2].copy()
    c[-1] = 0.0
    m = rng.uniform(*price_range, size=T)
    return TabularSSMDP(T=T, b=tuple(b), c=tuple(c), m=tuple(m))
