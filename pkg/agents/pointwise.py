"""
Point-wise learning to rank: a network maps the state to a ranking weight vector and is fit
by weighted logistic regression on whether each displayed page ended in a purchase.
"""

import numpy as np
from scipy.special import expit

from agents.base import ActorAgent
from agents.config import AgentConfig
from neural.adam import make_optimizer
from neural.mlp import Mlp, backward, forward
from shop_sim.session import SessionTrajectory
from ssmdp_core.types import Conversion


class PointwiseLtrAgent(ActorAgent):
    kind = "pointwise"

    def __init__(self, encoder, n_features: int, config: AgentConfig, rng: np.random.Generator):
        actor = Mlp((encoder.dim, *config.hidden, n_features), "tanh", rng)
        super().__init__(encoder, actor, config.noise, config.noise_halving, rng)
        self.optimizer = make_optimizer(config.optimizer, self.actor.params, config.pointwise_lr)

    def learn(self, trajectory: SessionTrajectory) -> None:
        pointwise_ltr_update(self, trajectory)

    def components(self) -> dict[str, object]:
        return {"actor": self.actor, "actor_opt": self.optimizer}


def page_logits(agent: PointwiseLtrAgent, states: np.ndarray, page_means: np.ndarray) -> np.ndarray:
    """z = (mean item features of the page) · μ(s), one per row."""
    return np.sum(page_means * forward(agent.actor, states), axis=-1)


def pointwise_fit(
    agent: PointwiseLtrAgent,
    states: np.ndarray,
    page_means: np.ndarray,
    labels: np.ndarray,
    weights: np.ndarray,
) -> float:
    """One optimizer step on the weighted cross-entropy of a batch; returns the loss before the step."""
    states = np.atleast_2d(states)
    page_means = np.atleast_2d(page_means)
    size = states.shape[0]
    probs = expit(page_logits(agent, states, page_means))
    clipped = np.clip(probs, 1e-12, 1.0 - 1e-12)
    loss = -np.sum(weights * (labels * np.log(clipped) + (1.0 - labels) * np.log(1.0 - clipped))) / size
    logit_gradient = weights * (probs - labels) / size
    grads, _ = backward(agent.actor, states, logit_gradient[:, None] * page_means)
    agent.optimizer.step(grads)
    return float(loss)


def pointwise_examples(agent: PointwiseLtrAgent, trajectory: SessionTrajectory):
    """
    One example per displayed page. The page that converted is positive with weight equal to
    the deal price; every other page is negative with weight one.
    """
    states, page_means, labels, weights = [], [], [], []
    for sample in trajectory.samples:
        states.append(agent.encoder(sample.state))
        page_means.append(sample.next_history.pages[-1].features.mean(axis=0))
        if isinstance(sample.next_state, Conversion):
            labels.append(1.0)
            weights.append(sample.next_state.deal_price)
        else:
            labels.append(0.0)
            weights.append(1.0)
    return np.array(states), np.array(page_means), np.array(labels), np.array(weights)


def pointwise_ltr_update(agent: PointwiseLtrAgent, trajectory: SessionTrajectory) -> PointwiseLtrAgent:
    if len(trajectory) == 0:
        return agent
    pointwise_fit(agent, *pointwise_examples(agent, trajectory))
    return agent
