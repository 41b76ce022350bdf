"""
Seeded experiment runner: warm-up, session loop, metrics, checkpoints, sweeps and repeats.
"""

import csv
import json
import time
from multiprocessing import Pool
from pathlib import Path
from typing import NamedTuple

import logfire
import numpy as np

from agents.base import Agent, RandomAgent
from agents.registry import build_agent
from harness.checkpoint import (
    Checkpoint,
    CheckpointConfigMismatchError,
    CheckpointCorruptError,
    load_checkpoint,
    restore_rng,
    rng_state_array,
    save_checkpoint,
)
from harness.config import (
    ConfigValidationError,
    ExperimentConfig,
    canonical_json,
    config_hash,
    override,
    validate_config,
)
from harness.metrics import CsvSink, MetricsRow, MovingAverage, metrics_row
from neural.params import ParamStore
from shop_sim.calibration import build_behavior_model
from shop_sim.catalog import sample_catalog
from shop_sim.clicks import CascadeClickModel
from shop_sim.session import SessionTrajectory, run_session
from ssmdp_core.errors import InconsistencyError

STREAMS = ("catalog", "model", "agent", "sessions")
METRICS_FILE = "metrics.csv"
CHECKPOINT_FILE = "checkpoint.bin"


def make_streams(config: ExperimentConfig) -> dict[str, np.random.Generator]:
    """One PCG64 stream per named seed; the stream index keeps equal seeds apart."""
    return {
        name: np.random.default_rng(np.random.SeedSequence([getattr(config.seeds, name), index]))
        for index, name in enumerate(STREAMS)
    }


class RunResult(NamedTuple):
    rows: list[MetricsRow]
    checkpoint: Checkpoint
    out_dir: Path | None


class Experiment:
    """
    Everything one run needs. Construction is deterministic in the config: catalog, behavior
    model, click model and a freshly initialized agent. `warm_up` or `restore` then brings the
    learning state to where the session loop starts.
    """

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.streams = make_streams(config)
        self.K = config.catalog.K
        self.catalog = sample_catalog(config.catalog, self.streams["catalog"])
        self.behavior = build_behavior_model(config.behavior, self.catalog, self.K, self.streams["model"])
        self.click_model = CascadeClickModel.from_catalog(
            self.catalog, self.behavior.preference, config.behavior.click_gain, config.behavior.click_offset
        )
        self.agent: Agent = build_agent(config.agent, self.catalog, self.K, self.streams["agent"])
        self.average = MovingAverage(config.metrics.window)
        self.sessions_done = np.zeros(1)

    def play(self, policy) -> SessionTrajectory:
        return run_session(
            self.catalog, self.behavior, policy, self.K, self.streams["sessions"], click_model=self.click_model
        )

    def warm_up(self) -> None:
        """Random-policy sessions that only pretrain the agent's environment models."""
        sessions = self.config.run.warmup_sessions
        if sessions == 0:
            return
        explorer = RandomAgent(self.catalog.n_features, self.agent.rng)
        with logfire.span("warm-up {sessions} sessions", sessions=sessions, agent=self.agent.kind):
            for _ in range(sessions):
                self.agent.pretrain(self.play(explorer))

    def step(self, wall_clock: bool = False) -> MetricsRow:
        started = time.perf_counter()
        trajectory = self.play(self.agent)
        self.agent.observe(trajectory)
        self.sessions_done += 1.0
        wall_ms = int((time.perf_counter() - started) * 1000) if wall_clock else 0
        return metrics_row(int(self.sessions_done[0]), trajectory, self.average, wall_ms)

    def run(self, sessions: int, sink: CsvSink | None = None) -> list[MetricsRow]:
        rows = []
        log_every = self.config.run.log_every
        for _ in range(sessions):
            row = self.step(self.config.metrics.wall_clock)
            rows.append(row)
            if sink is not None:
                sink.write(row)
            if row.session % log_every == 0:
                logfire.info(
                    "session {session}: moving average {moving_avg:.3f}",
                    session=row.session,
                    moving_avg=row.moving_avg,
                    agent=self.agent.kind,
                )
        for reason, count in self.agent.diagnostics.items():
            logfire.warn("{count} updates skipped ({reason})", count=count, reason=reason)
        return rows

    def checkpoint(self) -> Checkpoint:
        store = ParamStore({"run.sessions_done": self.sessions_done})
        store.add("metrics", self.average.state_arrays())
        store["rng.agent"] = rng_state_array(self.agent.rng)
        store["rng.sessions"] = rng_state_array(self.streams["sessions"])
        store.add("learner", dict(self.agent.param_store().items()))
        return Checkpoint(
            config_hash=config_hash(self.config), config_json=canonical_json(self.config), arrays=store.copy()
        )

    def restore(self, checkpoint: Checkpoint) -> None:
        if checkpoint.config_hash != config_hash(self.config):
            raise CheckpointConfigMismatchError("checkpoint was written for a different experiment config")
        arrays = checkpoint.arrays
        try:
            np.copyto(self.sessions_done, arrays["run.sessions_done"])
            self.average.load_state_arrays(arrays.section("metrics"))
            restore_rng(self.agent.rng, arrays["rng.agent"])
            restore_rng(self.streams["sessions"], arrays["rng.sessions"])
            self.agent.load_param_store(ParamStore(arrays.section("learner")))
        except (KeyError, ValueError, InconsistencyError) as exc:
            raise CheckpointCorruptError(f"checkpoint is missing or misshapes run state: {exc}") from exc


def run_experiment(config: ExperimentConfig, out_dir: str | Path | None = None) -> RunResult:
    """
    Warm-up, then `config.run.sessions` learning sessions. With `out_dir`, rows stream to
    metrics.csv and the final checkpoint goes to checkpoint.bin.
    """
    out = Path(out_dir) if out_dir is not None else None
    with logfire.span(
        "experiment {agent} for {sessions} sessions",
        agent=config.agent.kind,
        sessions=config.run.sessions,
    ):
        experiment = Experiment(config)
        experiment.warm_up()
        if out is None:
            rows = experiment.run(config.run.sessions)
        else:
            metrics_path = out / METRICS_FILE
            metrics_path.unlink(missing_ok=True)
            with CsvSink(metrics_path) as sink:
                rows = experiment.run(config.run.sessions, sink)
        checkpoint = experiment.checkpoint()
        if out is not None:
            save_checkpoint(checkpoint, out / CHECKPOINT_FILE)
    return RunResult(rows, checkpoint, out)


def resume_experiment(
    checkpoint: Checkpoint | str | Path,
    sessions: int,
    out_dir: str | Path | None = None,
    config: ExperimentConfig | None = None,
) -> RunResult:
    """
    Continue a checkpointed run for `sessions` more sessions. The embedded config is used
    unless one is given, in which case it must hash to the checkpoint's.
    """
    if not isinstance(checkpoint, Checkpoint):
        checkpoint = load_checkpoint(checkpoint, config_hash(config) if config is not None else None)
    if config is None:
        config = validate_config(json.loads(checkpoint.config_json))
    config = override(config, "run.sessions", sessions)

    out = Path(out_dir) if out_dir is not None else None
    with logfire.span("resume {agent} for {sessions} sessions", agent=config.agent.kind, sessions=sessions):
        experiment = Experiment(config)
        experiment.restore(checkpoint)
        if out is None:
            rows = experiment.run(sessions)
        else:
            with CsvSink(out / METRICS_FILE) as sink:
                rows = experiment.run(sessions, sink)
        final = experiment.checkpoint()
        if out is not None:
            save_checkpoint(final, out / CHECKPOINT_FILE)
    return RunResult(rows, final, out)


# ==========================================================
# --- Sweeps and repeats ---
# ==========================================================

def _run_arm(job: tuple[ExperimentConfig, Path | None]) -> list[MetricsRow]:
    config, out = job
    return run_experiment(config, out).rows


def _run_arms(jobs: list[tuple[ExperimentConfig, Path | None]], workers: int) -> list[list[MetricsRow]]:
    if workers <= 1 or len(jobs) <= 1:
        return [_run_arm(job) for job in jobs]
    with Pool(processes=min(workers, len(jobs))) as pool:
        return pool.map(_run_arm, jobs)


def sweep(
    config: ExperimentConfig,
    param: str,
    values: list,
    workers: int = 1,
    out_dir: str | Path | None = None,
) -> dict[str, list[MetricsRow]]:
    """
    One run per value of `param` (a `section.field` name); every other field, seeds included,
    is shared by all arms. With `out_dir`, each arm gets its own directory and the moving
    averages are combined into sweep.csv.
    """
    if not values:
        raise ConfigValidationError("a sweep needs at least one value")
    arms = {str(value): override(config, param, value) for value in values}
    out = Path(out_dir) if out_dir is not None else None
    jobs = [(arm, out / f"{param}={label}" if out else None) for label, arm in arms.items()]
    with logfire.span("sweep {param} over {count} values", param=param, count=len(arms)):
        streams = dict(zip(arms, _run_arms(jobs, workers)))
    if out is not None:
        write_sweep_csv(out / "sweep.csv", param, streams)
    return streams


def write_sweep_csv(path: Path, param: str, streams: dict[str, list[MetricsRow]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    labels = list(streams)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["session", *(f"{param}={label}" for label in labels)])
        for rows in zip(*(streams[label] for label in labels)):
            writer.writerow([rows[0].session, *(repr(row.moving_avg) for row in rows)])
    return path


class RepeatSummary(NamedTuple):
    mean: np.ndarray
    std_error: np.ndarray
    runs: list[list[MetricsRow]]


def summarize_runs(runs: list[list[MetricsRow]]) -> RepeatSummary:
    amounts = np.array([[row.transaction_amount for row in rows] for rows in runs])
    if amounts.shape[0] > 1:
        std_error = amounts.std(axis=0, ddof=1) / np.sqrt(amounts.shape[0])
    else:
        std_error = np.zeros(amounts.shape[1])
    return RepeatSummary(amounts.mean(axis=0), std_error, runs)


def repeat(
    config: ExperimentConfig,
    runs: int,
    workers: int = 1,
    out_dir: str | Path | None = None,
) -> RepeatSummary:
    """`runs` copies of the experiment with session seeds seeds.sessions + i."""
    if runs < 1:
        raise ConfigValidationError("repeat needs at least one run")
    base = config.seeds.sessions
    out = Path(out_dir) if out_dir is not None else None
    jobs = [
        (override(config, "seeds.sessions", base + index), out / f"run_{index}" if out else None)
        for index in range(runs)
    ]
    with logfire.span("repeat {agent} {runs} times", agent=config.agent.kind, runs=runs):
        summary = summarize_runs(_run_arms(jobs, workers))
    if out is not None:
        with (out / "repeat.csv").open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["session", "mean_transaction_amount", "std_error", "runs"])
            for index, (mean, error) in enumerate(zip(summary.mean, summary.std_error), start=1):
                writer.writerow([index, repr(float(mean)), repr(float(error)), runs])
    return summary
