"""
Deep deterministic policy gradient baseline: realized rewards, a replay buffer, and target
networks for the bootstrap.
"""

import logfire
import numpy as np

from agents.base import ActorAgent
from agents.config import AgentConfig
from neural.adam import make_optimizer
from neural.mlp import Mlp, backward, forward
from neural.replay import ReplayBuffer, buffer_push, buffer_sample
from neural.target import TargetPair, soft_update
from shop_sim.session import SessionTrajectory
from ssmdp_core.types import Continuation


class DdpgAgent(ActorAgent):
    kind = "ddpg"

    def __init__(self, encoder, n_features: int, config: AgentConfig, rng: np.random.Generator):
        actor = Mlp((encoder.dim, *config.hidden, n_features), "tanh", rng)
        super().__init__(encoder, actor, config.noise, config.noise_halving, rng)
        self.critic = Mlp((encoder.dim + n_features, *config.hidden, 1), "identity", rng)
        self.actor_pair = TargetPair(self.actor, config.tau)
        self.critic_pair = TargetPair(self.critic, config.tau)
        self.actor_optimizer = make_optimizer(config.optimizer, self.actor.params, config.actor_lr)
        self.critic_optimizer = make_optimizer(config.optimizer, self.critic.params, config.critic_lr)
        self.buffer = ReplayBuffer(config.buffer_capacity, encoder.dim, n_features)
        self.gamma = config.gamma
        self.batch_size = config.batch_size
        self.schedule = config.ddpg_schedule

    def remember(self, samples) -> None:
        for sample in samples:
            buffer_push(
                self.buffer,
                self.encoder(sample.state),
                sample.action.weights,
                sample.reward,
                self.encoder(Continuation(history=sample.next_history)),
                sample.next_state.is_terminal,
            )

    def pretrain(self, trajectory: SessionTrajectory) -> None:
        self.remember(trajectory.samples)

    def learn(self, trajectory: SessionTrajectory) -> None:
        ddpg_session_update(self, trajectory)

    def components(self) -> dict[str, object]:
        return {
            "actor": self.actor,
            "critic": self.critic,
            "actor_target": self.actor_pair.target,
            "critic_target": self.critic_pair.target,
            "actor_opt": self.actor_optimizer,
            "critic_opt": self.critic_optimizer,
            "replay": self.buffer,
        }


def ddpg_targets(agent: DdpgAgent, batch: dict[str, np.ndarray]) -> np.ndarray:
    """y = r + γ·(1 − terminal)·Q_target(s', π_target(s'))."""
    next_actions = forward(agent.actor_pair.target, batch["next_states"])
    q_next = forward(agent.critic_pair.target, np.hstack((batch["next_states"], next_actions)))[:, 0]
    return batch["rewards"] + agent.gamma * (1.0 - batch["terminals"]) * q_next


def ddpg_gradient_step(agent: DdpgAgent, batch: dict[str, np.ndarray]) -> None:
    size = batch["rewards"].shape[0]
    n_state = agent.encoder.dim
    targets = ddpg_targets(agent, batch)

    critic_inputs = np.hstack((batch["states"], batch["actions"]))
    errors = forward(agent.critic, critic_inputs)[:, 0] - targets
    critic_grads, _ = backward(agent.critic, critic_inputs, errors[:, None] / size)

    policy_actions = forward(agent.actor, batch["states"])
    _, input_gradient = backward(
        agent.critic, np.hstack((batch["states"], policy_actions)), np.ones((size, 1))
    )
    actor_grads, _ = backward(agent.actor, batch["states"], -input_gradient[:, n_state:] / size)

    agent.critic_optimizer.step(critic_grads)
    agent.actor_optimizer.step(actor_grads)
    soft_update(agent.critic_pair)
    soft_update(agent.actor_pair)


def ddpg_session_update(agent: DdpgAgent, trajectory: SessionTrajectory) -> DdpgAgent:
    """
    per_step: push each transition and take one gradient step once the buffer holds a batch.
    per_session: push the whole session, then take one gradient step.
    """
    if agent.schedule == "per_session":
        agent.remember(trajectory.samples)
        _step_if_ready(agent)
        return agent
    for sample in trajectory.samples:
        agent.remember((sample,))
        _step_if_ready(agent)
    return agent


def _step_if_ready(agent: DdpgAgent) -> None:
    if len(agent.buffer) < agent.batch_size:
        logfire.debug(
            "ddpg update deferred: {size} transitions buffered, batch needs {batch}",
            size=len(agent.buffer),
            batch=agent.batch_size,
        )
        return
    ddpg_gradient_step(agent, buffer_sample(agent.buffer, agent.batch_size, agent.rng))
