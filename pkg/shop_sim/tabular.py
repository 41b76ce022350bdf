"""
Bridges between the simulator and tabular SSMDP instances.
"""

import numpy as np

from shop_sim.behavior import BehaviorProbs, BehaviorSource, Continue, Leave, Purchase
from shop_sim.session import as_session_policy
from ssmdp_core.errors import InvalidArgumentError
from ssmdp_core.ranking import advance_history, remaining_items
from ssmdp_core.types import Catalog, Continuation, ItemPageHistory, TabularSSMDP


class TabularBehavior:
    """
    A behavior source that reads outcome probabilities from a tabular instance by step index.
    Conversions pay exactly m_t, optionally perturbed by multiplicative noise.
    """

    def __init__(self, mdp: TabularSSMDP, price_noise: float = 0.0):
        self.mdp = mdp
        self.price_noise = price_noise
        self.horizon = mdp.T

    def probs(self, history: ItemPageHistory) -> BehaviorProbs:
        t = history.step
        if not 1 <= t <= self.mdp.T:
            raise InvalidArgumentError(f"tabular instance has no step {t}")
        b, c, m = self.mdp.b[t - 1], self.mdp.c[t - 1], self.mdp.m[t - 1]
        return BehaviorProbs(b, 1.0 - b - c, c, m)

    def respond(self, history: ItemPageHistory, rng: np.random.Generator):
        b, l, _, m = self.probs(history)
        draw = rng.random()
        if draw < b:
            price = m
            if self.price_noise > 0.0:
                price *= 1.0 + self.price_noise * rng.standard_normal()
            return Purchase(deal_price=max(0.0, float(price)))
        if draw < b + l:
            return Leave()
        return Continue()


def induced_tabular(catalog: Catalog, behavior: BehaviorSource, policy, K: int, query=0) -> TabularSSMDP:
    """
    The tabular instance a deterministic policy induces: its continuation path of histories is
    fixed, so reading the behavior along that path gives b_t, c_t, m_t for t = 1..T.
    """
    policy = as_session_policy(policy)
    history = ItemPageHistory(query=query)
    b, c, m = [], [], []
    while True:
        pool = remaining_items(catalog, history)
        _, page = policy.rank(Continuation(history=history), pool, K)
        history = advance_history(history, page)
        probs = behavior.probs(history)
        b.append(probs.b)
        c.append(probs.c)
        m.append(probs.m)
        if len(pool) <= len(page):
            break
    c[-1] = 0.0
    return TabularSSMDP(T=len(b), b=tuple(b), c=tuple(c), m=tuple(m))
