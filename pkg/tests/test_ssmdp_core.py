import numpy as np
import pytest

from ssmdp_core.errors import InconsistencyError, InvalidArgumentError
from ssmdp_core.oracle import oracle_gmv, oracle_q, oracle_value, random_tabular_ssmdp
from ssmdp_core.ranking import advance_history, max_steps, remaining_items, reward, score, top_k_list
from ssmdp_core.types import (
    Abandon,
    Catalog,
    Continuation,
    Conversion,
    Item,
    ItemPageHistory,
    RankingAction,
    TabularSSMDP,
    TransitionSample,
)
from tests.helpers import history_of, make_page


# ==========================================================
# --- Ranking ---
# ==========================================================

@pytest.mark.parametrize(
    "features, weights, expected",
    [((1, 0), (1, 0), 1.0), ((0.5, 0.5), (1, 0), 0.5), ((2, 3), (0.1, 0.2), 0.8)],
)
def test_score_is_inner_product(features, weights, expected):
    assert score(Item(id=0, features=features), RankingAction(weights=weights)) == pytest.approx(expected)


def test_score_rejects_dimension_mismatch():
    with pytest.raises(InvalidArgumentError):
        score(Item(id=0, features=(1, 0)), RankingAction(weights=(1, 0, 0)))


def test_top_k_list_orders_by_score():
    pool = Catalog([1, 2, 3], [[1, 0], [0, 1], [0.5, 0.5]])
    page = top_k_list(pool, RankingAction(weights=(1, 0)), K=2)
    assert page.ids == (1, 3)
    assert page.step == 1


def test_top_k_list_singleton_pool():
    pool = Catalog([7], [[0.2, 0.9]])
    assert top_k_list(pool, RankingAction(weights=(-1, 1)), K=10).ids == (7,)


def test_top_k_list_breaks_ties_by_id():
    pool = Catalog([5, 2, 9], [[1, 0], [1, 0], [1, 0]])
    assert top_k_list(pool, RankingAction(weights=(1, 0)), K=3).ids == (2, 5, 9)


@pytest.mark.parametrize("seed", range(10))
def test_top_k_list_is_prefix_of_full_sort(seed):
    gen = np.random.default_rng(seed)
    features = gen.integers(0, 4, size=(25, 3)) / 4.0
    pool = Catalog(gen.permutation(100)[:25], features)
    action = RankingAction(weights=gen.uniform(-1, 1, size=3))
    scores = pool.features @ action.weights
    reference = sorted(range(len(pool)), key=lambda row: (-scores[row], pool.ids[row]))
    assert top_k_list(pool, action, K=10).ids == tuple(int(pool.ids[row]) for row in reference[:10])


def test_top_k_list_errors():
    pool = Catalog([1], [[1.0, 0.0]])
    with pytest.raises(InvalidArgumentError):
        top_k_list(pool, RankingAction(weights=(1, 0)), K=0)
    with pytest.raises(InvalidArgumentError):
        top_k_list(pool.subset(np.zeros(1, dtype=bool)), RankingAction(weights=(1, 0)), K=1)
    with pytest.raises(InvalidArgumentError):
        top_k_list(pool, RankingAction(weights=(1, 0, 0)), K=1)


def test_remaining_items_counts():
    catalog = Catalog(np.arange(1000), np.zeros((1000, 2)))
    assert len(remaining_items(catalog, ItemPageHistory())) == 1000
    history = history_of(catalog, [range(0, 10), range(10, 20), range(20, 30)])
    pool = remaining_items(catalog, history)
    assert len(pool) == 970
    assert not set(range(30)) & set(pool.ids.tolist())


def test_last_page_holds_the_leftovers():
    catalog = Catalog(np.arange(15), np.random.default_rng(0).random((15, 2)))
    action = RankingAction(weights=(1, 0))
    first = top_k_list(catalog, action, K=10)
    history = advance_history(ItemPageHistory(), first)
    pool = remaining_items(catalog, history)
    assert len(pool) == 5
    assert len(top_k_list(pool, action, K=10, step=2)) == 5


def test_remaining_items_rejects_foreign_items():
    catalog = Catalog(np.arange(5), np.zeros((5, 2)))
    history = ItemPageHistory(pages=(make_page([99], [[0.0, 0.0]]),))
    with pytest.raises(InconsistencyError):
        remaining_items(catalog, history)


def test_advance_history_steps():
    catalog = Catalog(np.arange(30), np.zeros((30, 2)))
    h1 = advance_history(ItemPageHistory(query="dress"), make_page([0, 1], np.zeros((2, 2)), step=1))
    assert h1.step == 1 and h1.query == "dress"
    h2 = history_of(catalog, [[0], [1]])
    h3 = advance_history(h2, make_page([2], [[0.0, 0.0]], step=3))
    assert h3.step == 3 and len(h3.pages) == 3
    assert h2.step == 2
    with pytest.raises(InvalidArgumentError):
        advance_history(h2, make_page([2], [[0.0, 0.0]], step=2))
    with pytest.raises(InvalidArgumentError):
        advance_history(h2, make_page([1], [[0.0, 0.0]], step=3))


def test_pool_is_exhausted_after_max_steps():
    catalog = Catalog(np.arange(23), np.random.default_rng(3).random((23, 3)))
    action = RankingAction(weights=(0.3, -0.2, 0.9))
    history = ItemPageHistory()
    for _ in range(max_steps(len(catalog), 5)):
        pool = remaining_items(catalog, history)
        page = top_k_list(pool, action, K=5, step=history.step + 1)
        history = advance_history(history, page)
        assert len(remaining_items(catalog, history)) == len(pool) - len(page)
    assert len(remaining_items(catalog, history)) == 0


@pytest.mark.parametrize("size, K, expected", [(1000, 10, 100), (15, 10, 2), (10, 10, 1)])
def test_max_steps(size, K, expected):
    assert max_steps(size, K) == expected


def test_reward_follows_next_state():
    catalog = Catalog(np.arange(4), np.zeros((4, 2)))
    history = history_of(catalog, [[0, 1]])
    state = Continuation(history=ItemPageHistory())
    action = RankingAction(weights=(0, 0))
    assert reward(state, action, Conversion(history=history, deal_price=35.0)) == 35.0
    assert reward(state, action, Abandon(history=history)) == 0.0
    assert reward(state, action, Continuation(history=history)) == 0.0
    with pytest.raises(InvalidArgumentError):
        reward(Abandon(history=history), action, Continuation(history=history))


def test_transition_sample_checks_reward_and_history():
    catalog = Catalog(np.arange(4), np.zeros((4, 2)))
    start = Continuation(history=ItemPageHistory())
    after = history_of(catalog, [[0, 1]])
    action = RankingAction(weights=(1, 0))
    sample = TransitionSample(
        state=start, action=action, reward=12.0,
        next_state=Conversion(history=after, deal_price=12.0), next_history=after,
    )
    assert sample.next_state.is_terminal
    with pytest.raises(ValueError):
        TransitionSample(
            state=start, action=action, reward=3.0,
            next_state=Abandon(history=after), next_history=after,
        )
    with pytest.raises(ValueError):
        TransitionSample(
            state=start, action=action, reward=0.0,
            next_state=Abandon(history=history_of(catalog, [[0], [1]])),
            next_history=history_of(catalog, [[0], [1]]),
        )


def test_history_rejects_repeated_items():
    catalog = Catalog(np.arange(4), np.zeros((4, 2)))
    with pytest.raises(ValueError):
        history_of(catalog, [[0, 1], [1, 2]])


def test_recent_pages_newest_first():
    catalog = Catalog(np.arange(12), np.zeros((12, 2)))
    history = history_of(catalog, [[0, 1], [2, 3], [4, 5], [6, 7], [8, 9], [10, 11]])
    assert [page.step for page in history.recent_pages(4)] == [6, 5, 4, 3]


# ==========================================================
# --- Tabular oracle ---
# ==========================================================

def test_oracle_gmv(two_step_mdp):
    assert oracle_gmv(two_step_mdp) == pytest.approx(5.0)
    assert oracle_gmv(TabularSSMDP(T=1, b=(0.4,), c=(0.0,), m=(25.0,))) == pytest.approx(10.0)
    assert oracle_gmv(TabularSSMDP(T=3, b=(0, 0, 0), c=(0.5, 0.5, 0), m=(9, 9, 9))) == 0.0


@pytest.mark.parametrize("gamma, expected", [(1.0, 5.0), (0.0, 2.0), (0.5, 3.5)])
def test_oracle_value(two_step_mdp, gamma, expected):
    assert oracle_value(two_step_mdp, gamma) == pytest.approx(expected)


def test_oracle_q(two_step_mdp):
    assert oracle_q(two_step_mdp, 0) == pytest.approx(5.0)
    assert oracle_q(two_step_mdp, 1) == pytest.approx(6.0)
    assert oracle_q(two_step_mdp, 2) == 0.0


def test_oracle_rejects_bad_arguments(two_step_mdp):
    with pytest.raises(InvalidArgumentError):
        oracle_value(two_step_mdp, 1.5)
    with pytest.raises(InvalidArgumentError):
        oracle_q(two_step_mdp, 3)


def test_tabular_instance_validation():
    with pytest.raises(ValueError):
        TabularSSMDP(T=2, b=(0.6, 0.1), c=(0.6, 0.0), m=(1.0, 1.0))
    with pytest.raises(ValueError):
        TabularSSMDP(T=2, b=(0.1, 0.1), c=(0.5, 0.2), m=(1.0, 1.0))
    with pytest.raises(ValueError):
        TabularSSMDP(T=1, b=(0.1,), c=(0.0,), m=(-1.0,))


def test_discounting_never_beats_gmv():
    gen = np.random.default_rng(2024)
    for _ in range(200):
        mdp = random_tabular_ssmdp(gen, int(gen.integers(1, 12)))
        gmv = oracle_gmv(mdp)
        assert oracle_value(mdp, 1.0) == pytest.approx(gmv, rel=1e-12, abs=1e-12)
        assert oracle_value(mdp, 1.0) == pytest.approx(oracle_q(mdp, 0, 1.0), rel=1e-12, abs=1e-12)
        for gamma in (0.0, 0.3, 0.9, 0.99):
            value = oracle_value(mdp, gamma)
            assert value <= gmv + 1e-12
            assert value == pytest.approx(oracle_q(mdp, 0, gamma), rel=1e-12, abs=1e-12)
            if mdp.T > 1 and any(c > 0 and b * m > 0 for c, b, m in zip(mdp.c, mdp.b[1:], mdp.m[1:])):
                assert value < gmv


def test_terminal_step_q_is_immediate_backup():
    mdp = random_tabular_ssmdp(np.random.default_rng(5), 6)
    assert oracle_q(mdp, mdp.T - 1) == pytest.approx(mdp.b[-1] * mdp.m[-1])
