"""
Long learning runs on the default simulator. Deselected by default; run with `pytest -m slow`.
SSMDP_ACCEPTANCE_SCALE shrinks or grows every session count (1.0 is the full protocol).
"""

import os
from pathlib import Path

import numpy as np
import pytest

from agents.bandits import CascadeUcbState, cascade_ucb_rank, cascade_update
from agents.config import AgentConfig
from agents.registry import build_agent
from harness.config import load_config, override
from harness.runner import METRICS_FILE, repeat, run_experiment, sweep
from shop_sim.behavior import UserBehaviorModel
from shop_sim.clicks import CascadeClickModel
from shop_sim.session import run_session
from ssmdp_core.types import Catalog

pytestmark = pytest.mark.slow

SCALE = float(os.getenv("SSMDP_ACCEPTANCE_SCALE", "1.0"))
WORKERS = os.cpu_count() or 1
PROTOCOL = Path(__file__).resolve().parents[1] / "configs" / "gamma_sweep.env"


def scaled(sessions: int) -> int:
    return max(int(sessions * SCALE), 1)


def final_window_mean(rows, window: int) -> float:
    return float(np.mean([row.transaction_amount for row in rows[-window:]]))


def protocol_config(**agent):
    config = load_config(PROTOCOL)
    for field, value in agent.items():
        config = override(config, f"agent.{field}", value)
    return override(config, "run.sessions", scaled(30_000))


# ==========================================================
# --- Learning curves ---
# ==========================================================

def test_full_horizon_discount_earns_the_most():
    # three shared session seeds per arm; every arm sees the same users
    window = scaled(5_000)
    means = {}
    for gamma in (0.0, 0.5, 1.0):
        summary = repeat(protocol_config(kind="dpg_fbe", gamma=gamma), runs=3, workers=WORKERS)
        means[gamma] = float(np.mean(summary.mean[-window:]))
    assert means[1.0] >= means[0.5] >= means[0.0]
    assert means[1.0] >= 1.1 * means[0.0]


def test_full_backup_beats_the_baselines():
    kinds = ["dpg_fbe", "ddpg", "pointwise", "cascade_ucb1", "cascade_klucb", "ranked_exp3"]
    streams = sweep(protocol_config(gamma=1.0), "agent.kind", kinds, workers=WORKERS)
    window = scaled(5_000)
    means = {kind: final_window_mean(rows, window) for kind, rows in streams.items()}
    assert means["dpg_fbe"] >= 1.1 * means["ddpg"]
    for baseline in kinds[2:]:
        assert means["dpg_fbe"] >= 1.1 * means[baseline]
        assert means["ddpg"] >= 1.1 * means[baseline]


def test_repeated_runs_write_identical_files(tmp_path):
    config = override(protocol_config(kind="dpg_fbe"), "run.sessions", scaled(3_000))
    first = run_experiment(config, tmp_path / "first")
    second = run_experiment(config, tmp_path / "second")
    assert (tmp_path / "first" / METRICS_FILE).read_bytes() == (tmp_path / "second" / METRICS_FILE).read_bytes()
    assert first.checkpoint == second.checkpoint


# ==========================================================
# --- Bandit sanity on a small cascade instance ---
# ==========================================================

ATTRACTION = {0: 0.6, 1: 0.5, 2: 0.45, 3: 0.1, 4: 0.1, 5: 0.08, 6: 0.06, 7: 0.05, 8: 0.05, 9: 0.04}


@pytest.mark.parametrize("variant", ["ucb1", "kl"])
def test_cascade_ucb_regret_falls_by_three_quarters(variant):
    model = CascadeClickModel(ATTRACTION)
    pool = Catalog(np.arange(10), np.zeros((10, 2)))
    best = model.click_probability([0, 1, 2])
    state = CascadeUcbState(10)
    gen = np.random.default_rng(12)
    regret = []
    for _ in range(scaled(10_000)):
        page = cascade_ucb_rank(state, pool, 3, state.t, variant)
        regret.append(best - model.click_probability(page.ids))
        cascade_update(state, page, model.simulate(page, gen))
    early = np.mean(regret[: scaled(1_000)])
    late = np.mean(regret[-scaled(1_000):])
    assert late < 0.25 * early


@pytest.fixture
def small_shop():
    """Ten items, three per page, clicks and purchases sharing one preference."""
    gen = np.random.default_rng(13)
    catalog = Catalog(np.arange(10), gen.uniform(0.0, 1.0, size=(10, 4)))
    preference = np.array([-0.3, 0.6, 0.5, 0.2])
    behavior = UserBehaviorModel(
        preference=preference / np.linalg.norm(preference),
        attraction_scale=4.0,
        conversion_offset=2.0,
        base_leave=0.05,
        fatigue=0.02,
        horizon=4,
    )
    return catalog, behavior, CascadeClickModel.from_catalog(catalog, behavior.preference, 6.0, 2.0)


def first_page_click_rate(small_shop, config: AgentConfig, seed: int) -> float:
    catalog, behavior, clicks = small_shop
    agent = build_agent(config, catalog, 3, np.random.default_rng(seed))
    gen = np.random.default_rng(seed + 1)
    sessions = scaled(6_000)
    rates = []
    for _ in range(sessions):
        trajectory = run_session(catalog, behavior, agent, 3, gen, click_model=clicks)
        agent.observe(trajectory)
        rates.append(clicks.click_probability(trajectory.samples[0].next_history.pages[-1].ids))
    return float(np.mean(rates[-scaled(1_000):]))


@pytest.mark.parametrize(
    "config",
    [
        AgentConfig(kind="ranked_exp3", exp3_mixing=0.05),
        AgentConfig(kind="pointwise", hidden=(16,), pointwise_lr=0.01, noise=0.05, noise_halving=1000),
    ],
    ids=["ranked_exp3", "pointwise"],
)
def test_learners_click_more_than_random(small_shop, config):
    random_rate = first_page_click_rate(small_shop, AgentConfig(kind="random"), seed=14)
    assert first_page_click_rate(small_shop, config, seed=14) >= 1.2 * random_rate
