from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

AgentKind = Literal[
    "dpg_fbe",
    "ddpg",
    "pointwise",
    "cascade_ucb1",
    "cascade_klucb",
    "ranked_exp3",
    "random",
]


class AgentConfig(BaseModel):
    """
    Agent choice and hyperparameters. Defaults follow the simulation protocol: (200, 100)
    hidden units, actor/critic step sizes 1e-5/1e-4, τ = 1e-3.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: AgentKind = Field(default="dpg_fbe", description="Which learner ranks the pages.")
    gamma: float = Field(default=1.0, ge=0.0, le=1.0, description="Discount on the bootstrapped continuation value.")
    history_window: int = Field(default=4, ge=1, description="Item pages of the session the state features look back on.")
    hidden: tuple[int, ...] = Field(default=(200, 100), description="Hidden layer widths of actor and critic.")
    actor_lr: float = Field(default=1e-5, ge=0.0, description="α_θ.")
    critic_lr: float = Field(default=1e-4, ge=0.0, description="α_w.")
    tau: float = Field(default=1e-3, gt=0.0, le=1.0, description="Soft target mixing rate.")
    optimizer: Literal["adam", "sgd"] = Field(default="adam", description="How accumulated gradients are applied.")
    noise: float = Field(default=0.1, ge=0.0, description="Initial std of the Gaussian exploration noise.")
    noise_halving: int = Field(default=20000, ge=1, description="Sessions after which the noise std halves.")
    policy_gradient_at: Literal["executed", "policy"] = Field(
        default="executed", description="Evaluate ∇_a Q at the executed noisy action or at π(s)."
    )
    outcome_lr: float = Field(default=0.002, ge=0.0, description="Step size of the outcome classifier.")
    price_lr: float = Field(default=0.001, ge=0.0, description="Step size of the price model.")
    buffer_capacity: int = Field(default=100_000, ge=1, description="DDPG replay capacity.")
    batch_size: int = Field(default=64, ge=1, description="DDPG minibatch size.")
    ddpg_schedule: Literal["per_step", "per_session"] = Field(
        default="per_step", description="One DDPG gradient step per transition, or one per session."
    )
    pointwise_lr: float = Field(default=1e-4, ge=0.0, description="Step size of the point-wise LTR network.")
    exp3_mixing: float = Field(default=0.1, ge=0.0, le=1.0, description="RankedExp3 uniform exploration share.")

    @field_validator("hidden", mode="before")
    @classmethod
    def _split_widths(cls, value):
        if value is None:
            return ()
        if isinstance(value, str):
            return tuple(int(part) for part in value.split(",") if part.strip())
        return value
