import numpy as np
import pytest
from scipy.optimize import minimize
from scipy.special import log_softmax, softmax

from env_models.estimators import ExactEstimator, LearnedEstimator
from env_models.features import CatalogStats, HistoryEncoder, featurize_history, page_block, position_weights
from env_models.outcome import OutcomeClassifier, OutcomeLabel, predict_outcome, update_outcome
from env_models.price import PriceModel, predict_price, update_price
from shop_sim.behavior import Leave, Purchase, behavior_probs, user_response
from ssmdp_core.errors import InvalidArgumentError
from ssmdp_core.types import Abandon, Catalog, Continuation, Conversion, ItemPageHistory
from tests.helpers import history_of


@pytest.fixture
def stats(small_catalog):
    return CatalogStats.from_catalog(small_catalog, K=5, window=4)


# ==========================================================
# --- History features ---
# ==========================================================

def test_feature_width(stats, small_catalog):
    encoder = HistoryEncoder(stats)
    assert encoder.dim == 4 * 3 * 4 + 2
    assert featurize_history(history_of(small_catalog, [[0, 1, 2]]), stats).shape == (50,)


def test_short_histories_are_zero_padded(stats, small_catalog):
    feats = featurize_history(history_of(small_catalog, [[0, 1, 2, 3, 4]]), stats)
    assert np.any(feats[:12] != 0.0)
    np.testing.assert_array_equal(feats[12:48], 0.0)
    assert feats[-2] == pytest.approx(1 / 8)
    assert feats[-1] == pytest.approx(0.25)


def test_page_mean_ignores_order_but_discount_does_not(stats, small_catalog):
    forward = featurize_history(history_of(small_catalog, [[0, 1, 2, 3]]), stats)
    backward = featurize_history(history_of(small_catalog, [[3, 2, 1, 0]]), stats)
    np.testing.assert_allclose(forward[:4], backward[:4])
    np.testing.assert_allclose(forward[8:12], backward[8:12])
    assert not np.allclose(forward[4:8], backward[4:8])


def test_page_block_holds_the_per_feature_max(stats, small_catalog):
    page = history_of(small_catalog, [[5, 6, 7]]).pages[-1]
    standardized = (small_catalog.features[[5, 6, 7]] - stats.mean) / stats.std
    block = page_block(page, stats)
    np.testing.assert_allclose(block[8:12], standardized.max(axis=0))
    assert np.all(block[8:12] >= block[:4])


def test_only_the_window_matters(stats, small_catalog):
    tail = [[10, 11], [12, 13], [14, 15], [16, 17]]
    first = featurize_history(history_of(small_catalog, [[0, 1], [2, 3], *tail]), stats)
    second = featurize_history(history_of(small_catalog, [[4, 5], [6, 7], *tail]), stats)
    np.testing.assert_array_equal(first, second)


def test_features_need_a_page(stats):
    with pytest.raises(InvalidArgumentError):
        featurize_history(ItemPageHistory(), stats)


def test_position_weights_sum_to_one():
    weights = position_weights(10)
    assert weights.sum() == pytest.approx(1.0)
    assert np.all(np.diff(weights) < 0)


def test_constant_feature_keeps_unit_scale():
    catalog = Catalog(np.arange(6), np.column_stack((np.full(6, 0.5), np.linspace(0, 1, 6))))
    stats = CatalogStats.from_catalog(catalog, K=2)
    assert stats.std[0] == 1.0
    assert stats.horizon == 3


# ==========================================================
# --- Outcome classifier ---
# ==========================================================

def test_zero_weights_predict_uniform():
    model = OutcomeClassifier(5)
    assert predict_outcome(model, np.arange(5.0)) == pytest.approx((1 / 3, 1 / 3, 1 / 3))


def test_zero_step_size_leaves_the_model_alone():
    model = OutcomeClassifier(3, step_size=0.0)
    update_outcome(model, np.ones(3), OutcomeLabel.CONVERSION)
    np.testing.assert_array_equal(model.weights, 0.0)
    np.testing.assert_array_equal(model.bias, 0.0)


def test_outcome_step_size_must_be_nonnegative():
    with pytest.raises(InvalidArgumentError):
        OutcomeClassifier(3, step_size=-0.1)


def test_outcome_classifier_calibrates_to_label_frequencies():
    model = OutcomeClassifier(3, step_size=0.002)
    feats = np.full(3, 0.5)
    cycle = [OutcomeLabel.CONVERSION] * 2 + [OutcomeLabel.ABANDON] * 3 + [OutcomeLabel.CONTINUATION] * 5
    for _ in range(2000):
        for label in cycle:
            update_outcome(model, feats, label)
    assert predict_outcome(model, feats) == pytest.approx((0.2, 0.3, 0.5), abs=0.02)


def test_outcome_labels(small_catalog):
    history = history_of(small_catalog, [[0, 1]])
    assert OutcomeLabel.of(Conversion(history=history, deal_price=3.0)) is OutcomeLabel.CONVERSION
    assert OutcomeLabel.of(Abandon(history=history)) is OutcomeLabel.ABANDON
    assert OutcomeLabel.of(Continuation(history=history)) is OutcomeLabel.CONTINUATION


# ==========================================================
# --- Price model ---
# ==========================================================

def test_price_model_converges_to_constant():
    model = PriceModel(3)
    feats = np.full(3, 0.5)
    for _ in range(10_000):
        update_price(model, feats, 35.0)
    assert predict_price(model, feats) == pytest.approx(35.0, abs=1e-3)


def test_price_model_tracks_the_mean():
    model = PriceModel(3)
    feats = np.full(3, 0.5)
    for _ in range(5_000):
        update_price(model, feats, 20.0)
        update_price(model, feats, 50.0)
    assert predict_price(model, feats) == pytest.approx(35.0, abs=0.5)


def test_price_is_clamped_and_recovers():
    model = PriceModel(2)
    model.bias[0] = -5.0
    feats = np.array([0.2, 0.4])
    assert predict_price(model, feats) == 0.0
    for _ in range(10_000):
        update_price(model, feats, 20.0)
    assert predict_price(model, feats) == pytest.approx(20.0, abs=1e-3)


def test_negative_prices_are_rejected():
    with pytest.raises(InvalidArgumentError):
        update_price(PriceModel(2), np.ones(2), -1.0)


# ==========================================================
# --- Estimators ---
# ==========================================================

def test_learned_estimator_starts_uninformed(stats, small_catalog):
    estimator = LearnedEstimator(HistoryEncoder(stats))
    history = history_of(small_catalog, [[0, 1, 2]])
    b, c, m = estimator.estimate(history)
    assert (b, c) == pytest.approx((1 / 3, 1 / 3))
    assert m == 0.0
    assert set(estimator.parameters()) == {"outcome.weights", "outcome.bias", "price.weights", "price.bias"}


def test_learned_estimator_prices_only_conversions(stats, small_catalog):
    estimator = LearnedEstimator(HistoryEncoder(stats))
    history = history_of(small_catalog, [[0, 1, 2]])
    estimator.observe(history, Abandon(history=history))
    np.testing.assert_array_equal(estimator.price.weights, 0.0)
    assert estimator.estimate(history)[0] < 1 / 3
    estimator.observe(history, Conversion(history=history, deal_price=40.0))
    assert estimator.estimate(history)[2] > 0.0


def test_exact_estimator_reads_the_behavior(small_catalog, behavior):
    history = history_of(small_catalog, [[0, 1, 2], [3, 4, 5]])
    b, _, c, m = behavior_probs(behavior, history)
    estimator = ExactEstimator(behavior)
    estimator.observe(history, Abandon(history=history))
    assert estimator.estimate(history) == (b, c, m)
    assert estimator.parameters() == {}


def simulated_next_state(behavior, history, gen):
    response = user_response(behavior, history, gen)
    if isinstance(response, Purchase):
        return Conversion(history=history, deal_price=response.deal_price)
    if isinstance(response, Leave):
        return Abandon(history=history)
    return Continuation(history=history)


def test_learned_continuation_matches_the_simulator(stats, small_catalog, behavior):
    histories = [
        history_of(small_catalog, [[0, 1, 2, 3, 4]]),
        history_of(small_catalog, [[5, 6, 7, 8, 9], [10, 11, 12, 13, 14]]),
        history_of(small_catalog, [[15, 16, 17, 18, 19], [20, 21, 22, 23, 24], [25, 26, 27, 28, 29]]),
        history_of(small_catalog, [[30, 31], [32, 33], [34, 35], [36, 37], [38, 39]]),
    ]
    estimator = LearnedEstimator(HistoryEncoder(stats), outcome_step=0.0005)
    gen = np.random.default_rng(21)
    for index in gen.integers(0, len(histories), size=60_000):
        history = histories[index]
        estimator.observe(history, simulated_next_state(behavior, history, gen))
    for history in histories:
        _, c, _ = estimator.estimate(history)
        assert c == pytest.approx(behavior_probs(behavior, history).c, abs=0.03)


def batch_fit_outcome(feats, labels):
    """Unregularized multinomial logistic regression by full-batch BFGS."""
    n, d = feats.shape
    design = np.column_stack((feats, np.ones(n)))
    onehot = np.eye(3)[labels]

    def loss_and_grad(flat):
        coef = flat.reshape(3, d + 1)
        log_probs = log_softmax(design @ coef.T, axis=1)
        loss = -np.sum(onehot * log_probs) / n
        grad = (np.exp(log_probs) - onehot).T @ design / n
        return loss, grad.ravel()

    result = minimize(loss_and_grad, np.zeros(3 * (d + 1)), jac=True, method="BFGS", options={"gtol": 1e-8})
    coef = result.x.reshape(3, d + 1)
    return np.exp(log_softmax(design @ coef.T, axis=1))


def test_online_classifier_matches_a_batch_fit():
    gen = np.random.default_rng(22)
    feats = gen.normal(size=(200, 3))
    true_coef = np.array([[1.0, -0.5, 0.3], [-0.4, 0.8, 0.0], [0.0, 0.0, -0.6]])
    labels = np.array([gen.choice(3, p=softmax(true_coef @ row)) for row in feats])

    model = OutcomeClassifier(3, step_size=0.01)
    for _ in range(100):
        for row in gen.permutation(200):
            update_outcome(model, feats[row], OutcomeLabel(labels[row]))
    online = np.array([predict_outcome(model, row) for row in feats])
    np.testing.assert_allclose(online, batch_fit_outcome(feats, labels), atol=0.05)
