"""
Deterministic policy gradient with full backup estimation.

Per session, the critic's TD error bootstraps through the estimated conversion probability,
deal price and continuing probability of each visited history instead of the realized
reward. Critic and actor updates are accumulated across the session, averaged by its length
and applied once. Target networks follow afterwards.
"""

import logfire
import numpy as np

from agents.base import ActorAgent, ArraysComponent
from agents.config import AgentConfig
from env_models.estimators import EnvironmentEstimator
from neural.adam import make_optimizer
from neural.mlp import Mlp, backward, forward
from neural.target import TargetPair, soft_update
from shop_sim.session import SessionTrajectory
from ssmdp_core.errors import InvalidArgumentError
from ssmdp_core.types import Continuation


def fbe_target(b: float, m: float, c: float, q_next: float) -> float:
    """b·m + c·q_next; with c = 0 the bootstrap term is dropped entirely."""
    if not (0.0 <= b <= 1.0 and 0.0 <= c <= 1.0 and b + c <= 1.0 + 1e-9):
        raise InvalidArgumentError(f"need b, c in [0, 1] with b + c <= 1, got b={b}, c={c}")
    if m < 0.0:
        raise InvalidArgumentError(f"deal price estimate must be nonnegative, got {m}")
    if c == 0.0:
        return b * m
    return b * m + c * q_next


class DpgFbeAgent(ActorAgent):
    kind = "dpg_fbe"

    def __init__(
        self,
        encoder,
        n_features: int,
        estimator: EnvironmentEstimator,
        config: AgentConfig,
        rng: np.random.Generator,
    ):
        actor = Mlp((encoder.dim, *config.hidden, n_features), "tanh", rng)
        super().__init__(encoder, actor, config.noise, config.noise_halving, rng)
        self.critic = Mlp((encoder.dim + n_features, *config.hidden, 1), "identity", rng)
        self.actor_pair = TargetPair(self.actor, config.tau)
        self.critic_pair = TargetPair(self.critic, config.tau)
        self.actor_optimizer = make_optimizer(config.optimizer, self.actor.params, config.actor_lr)
        self.critic_optimizer = make_optimizer(config.optimizer, self.critic.params, config.critic_lr)
        self.estimator = estimator
        self.gamma = config.gamma
        self.policy_gradient_at = config.policy_gradient_at

    def q_value(self, state_features: np.ndarray, action: np.ndarray, target: bool = False) -> float:
        net = self.critic_pair.target if target else self.critic
        return float(forward(net, np.concatenate((state_features, action)))[0])

    def pretrain(self, trajectory: SessionTrajectory) -> None:
        for sample in trajectory.samples:
            self.estimator.observe(sample.next_history, sample.next_state)

    def learn(self, trajectory: SessionTrajectory) -> None:
        dpg_fbe_session_update(self, trajectory)

    def components(self) -> dict[str, object]:
        return {
            "actor": self.actor,
            "critic": self.critic,
            "actor_target": self.actor_pair.target,
            "critic_target": self.critic_pair.target,
            "actor_opt": self.actor_optimizer,
            "critic_opt": self.critic_optimizer,
            "estimator": ArraysComponent(self.estimator.parameters()),
        }


def _bootstrap(agent: DpgFbeAgent, next_history) -> float:
    """Q_target(s', π_target(s')) at the continuation state of the next history."""
    next_features = agent.encoder(Continuation(history=next_history))
    next_action = forward(agent.actor_pair.target, next_features)
    return agent.q_value(next_features, next_action, target=True)


def dpg_fbe_session_update(agent: DpgFbeAgent, trajectory: SessionTrajectory) -> DpgFbeAgent:
    """
    Estimates are read before the session is observed, so a non-finite TD error anywhere
    in the session leaves the estimator, networks and optimizers untouched.
    """
    if len(trajectory) == 0:
        raise InvalidArgumentError("cannot learn from an empty trajectory")
    n_state = agent.encoder.dim
    critic_grads = [np.zeros_like(param) for param in agent.critic.params]
    actor_grads = [np.zeros_like(param) for param in agent.actor.params]

    for sample in trajectory.samples:
        b, c, m = agent.estimator.estimate(sample.next_history)
        q_next = _bootstrap(agent, sample.next_history) if c > 0.0 else 0.0

        state_features = agent.encoder(sample.state)
        executed = sample.action.weights
        critic_input = np.concatenate((state_features, executed))
        delta = fbe_target(b, m, c, agent.gamma * q_next) - float(forward(agent.critic, critic_input)[0])
        if not np.isfinite(delta):
            agent.diagnostics["nonfinite_td"] += 1
            logfire.warn(
                "dpg-fbe session update skipped: non-finite TD error at step {step}",
                step=sample.state.history.step,
            )
            return agent

        grads, _ = backward(agent.critic, critic_input, np.array([delta]))
        for total, grad in zip(critic_grads, grads):
            total -= grad

        if agent.policy_gradient_at == "policy":
            at = np.concatenate((state_features, forward(agent.actor, state_features)))
        else:
            at = critic_input
        _, input_gradient = backward(agent.critic, at, np.ones(1))
        action_gradient = input_gradient[n_state:]
        grads, _ = backward(agent.actor, state_features, action_gradient)
        for total, grad in zip(actor_grads, grads):
            total -= grad

    for sample in trajectory.samples:
        agent.estimator.observe(sample.next_history, sample.next_state)
    t = len(trajectory)
    agent.critic_optimizer.step([grad / t for grad in critic_grads])
    agent.actor_optimizer.step([grad / t for grad in actor_grads])
    soft_update(agent.critic_pair)
    soft_update(agent.actor_pair)
    return agent
