"""
Experiment configuration: one flat `section.key=value` file, read with python-dotenv and
validated into nested pydantic models.
"""

import hashlib
import json
from pathlib import Path

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from agents.config import AgentConfig
from shop_sim.config import BehaviorConfig, CatalogConfig
from ssmdp_core.errors import SsmdpError

# excluded from the hash so a resumed run may ask for a different session count or log cadence
RUN_LENGTH_FIELDS = {"run": {"sessions", "log_every"}}


class ConfigValidationError(SsmdpError):
    """An experiment config that cannot be used; raised before any session runs."""


class RunConfig(BaseModel):
    """Session counts and progress cadence of one run."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    sessions: int = Field(default=100_000, ge=1, description="Learning sessions after warm-up.")
    warmup_sessions: int = Field(default=2000, ge=0, description="Random-policy sessions that pretrain the environment models.")
    log_every: int = Field(default=1000, ge=1, description="Sessions between progress events.")


class SeedConfig(BaseModel):
    """One explicit seed per random stream."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    catalog: int = Field(default=0, ge=0, description="Item feature draws.")
    model: int = Field(default=1, ge=0, description="User preference and θ_b calibration.")
    agent: int = Field(default=2, ge=0, description="Network initialization, exploration noise, replay sampling.")
    sessions: int = Field(default=3, ge=0, description="User responses and clicks during sessions.")


class MetricsConfig(BaseModel):
    """What the per-session metrics stream records."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    window: int = Field(default=1000, ge=1, description="Moving-average window in sessions.")
    wall_clock: bool = Field(default=False, description="Record elapsed milliseconds; off keeps CSVs byte-reproducible.")


class ExperimentConfig(BaseModel):
    """Everything a run depends on; its hash identifies checkpoints."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    catalog: CatalogConfig = Field(default_factory=CatalogConfig)
    behavior: BehaviorConfig = Field(default_factory=BehaviorConfig)
    agent: AgentConfig = Field(default_factory=AgentConfig)
    run: RunConfig = Field(default_factory=RunConfig)
    seeds: SeedConfig = Field(default_factory=SeedConfig)
    metrics: MetricsConfig = Field(default_factory=MetricsConfig)


def _parse_value(raw: str | None):
    if raw is None or raw.strip().lower() in ("", "none", "null"):
        return None
    raw = raw.strip()
    if "," in raw:
        return [part.strip() for part in raw.split(",") if part.strip()]
    return raw


def nest_flat(values: dict[str, str | None]) -> dict[str, dict]:
    """{"agent.gamma": "0.9"} -> {"agent": {"gamma": "0.9"}}."""
    nested: dict[str, dict] = {}
    for key, raw in values.items():
        section, dot, field = key.partition(".")
        if not dot or not field:
            raise ConfigValidationError(f"config key {key!r} must look like section.field")
        nested.setdefault(section, {})[field] = _parse_value(raw)
    return nested


def validate_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        fields = ", ".join(".".join(str(part) for part in error["loc"]) for error in exc.errors())
        raise ConfigValidationError(f"invalid config field(s) {fields}: {exc}") from exc


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigValidationError(f"config file {path} does not exist")
    return validate_config(nest_flat(dotenv_values(path)))


def override(config: ExperimentConfig, name: str, value) -> ExperimentConfig:
    """A copy with `section.field` replaced and revalidated."""
    section, _, field = name.partition(".")
    data = config.model_dump()
    if section not in data or field not in data[section]:
        raise ConfigValidationError(f"unknown config parameter {name!r}")
    data[section][field] = _parse_value(value) if isinstance(value, str) else value
    return validate_config(data)


def canonical_json(config: ExperimentConfig) -> str:
    return json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


def config_hash(config: ExperimentConfig) -> bytes:
    """SHA-256 of the canonical config JSON without the run-length fields."""
    payload = json.dumps(
        config.model_dump(mode="json", exclude=RUN_LENGTH_FIELDS), sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(payload.encode("utf-8")).digest()


def write_config(config: ExperimentConfig, path: str | Path) -> Path:
    """Write the config back in the flat file format, one banner per section."""
    path = Path(path)
    lines = []
    for section, fields in config.model_dump(mode="json").items():
        lines += ["# ==========================================================", f"# --- {section} ---",
                  "# =========================================================="]
        for field, value in fields.items():
            if isinstance(value, bool):
                value = str(value).lower()
            elif isinstance(value, list):
                value = ",".join(str(part) for part in value)
            lines.append(f"{section}.{field}={'' if value is None else value}")
        lines.append("")
    path.write_text("\n".join(lines), encoding="utf-8")
    return path
