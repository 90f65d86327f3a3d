import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.metrics import roc_auc_score

from synthaudit.exceptions import DegenerateTarget, DimensionMismatch, ZeroVector
from synthaudit.models import (
    BoostedTreesClassifier,
    BoostedTreesRegressor,
    ReluNetClassifier,
    auc,
    cosine_similarity,
    cross_entropy,
    gini,
    predict_proba,
    train_forest,
    train_gbm,
    train_nn,
)
from synthaudit.models.neural import loss_and_gradients

from .conftest import auc_pairs

scored_labels = st.integers(2, 200).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(0, 8).map(float), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n).filter(lambda l: 0 < sum(l) < len(l)),
    )
)


class TestAuc:
    @pytest.mark.parametrize("scores,labels,expected", [
        ([0.9, 0.1], [1, 0], 1.0),
        ([0.1, 0.9], [1, 0], 0.0),
        ([0.5] * 4, [1, 0, 1, 0], 0.5),
    ])
    def test_examples(self, scores, labels, expected):
        assert auc(scores, labels) == expected

    @given(scored_labels)
    def test_equals_pair_count(self, data):
        scores, labels = data
        assert auc(scores, labels) == pytest.approx(auc_pairs(scores, labels), abs=1e-12)

    @given(scored_labels)
    def test_monotone_invariance(self, data):
        scores, labels = data
        s = np.asarray(scores)
        assert auc(np.exp(s) * 3 - 7, labels) == auc(s, labels)

    def test_matches_sklearn(self):
        rng = np.random.default_rng(0)
        s, y = rng.normal(size=300), rng.integers(0, 2, 300)
        assert auc(s, y) == pytest.approx(roc_auc_score(y, s), abs=1e-12)
        assert gini(s, y) == pytest.approx(2 * roc_auc_score(y, s) - 1, abs=1e-12)

    def test_single_class(self):
        with pytest.raises(DegenerateTarget):
            auc([0.1, 0.2], [1, 1])


class TestCosineAndCrossEntropy:
    def test_cosine_examples(self):
        assert cosine_similarity([0.2, 0.8], [0.2, 0.8]) == pytest.approx(1.0)
        assert cosine_similarity([1, 0], [0, 1]) == 0.0
        assert cosine_similarity([1, 0], [1, 1]) == pytest.approx(0.70710678)

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            cosine_similarity([0, 0], [1, 1])

    def test_cross_entropy_examples(self):
        np.testing.assert_allclose(cross_entropy([0.5], [1]), [0.69314718], rtol=1e-8)
        np.testing.assert_allclose(cross_entropy([1 - 1e-12], [1]), [1e-12], rtol=1e-3)
        np.testing.assert_allclose(cross_entropy([0.9], [0]), [2.30258509], rtol=1e-8)

    def test_cross_entropy_is_finite_at_extremes(self):
        assert np.all(np.isfinite(cross_entropy([0.0, 1.0], [1, 0])))


def separable(n=200, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(4 * n, 2))
    s = X.sum(axis=1)
    X = X[np.abs(s) > 1][:n]
    return X, (X.sum(axis=1) > 0).astype(int)


class TestBoosting:
    def test_separable_training_auc(self):
        X, y = separable()
        m = train_gbm(X, y, seed=0)
        assert auc(predict_proba(m, X), y) == 1.0

    def test_trees_have_at_most_four_splits(self):
        X, y = separable()
        m = train_gbm(X, y, seed=0)
        assert m.trees_ and all(t.n_splits <= 4 for t in m.trees_)
        for t in m.trees_:
            assert np.all(np.isfinite(t.threshold[t.feature >= 0]))

    def test_constant_target(self):
        with pytest.raises(DegenerateTarget):
            train_gbm(np.zeros((30, 2)), np.ones(30))

    def test_constant_features_predict_base_rate(self):
        rng = np.random.default_rng(1)
        y = (rng.random(400) < 0.3).astype(int)
        X = np.ones((400, 3))
        p = predict_proba(train_gbm(X, y), X)
        assert np.ptp(p) == 0
        assert abs(auc(p, y) - 0.5) <= 0.02

    def test_zero_rounds_predict_base_rate(self):
        y = np.array([1] * 3 + [0] * 7)
        m = BoostedTreesClassifier(n_estimators=0).fit(np.arange(10.0)[:, None], y)
        np.testing.assert_allclose(predict_proba(m, np.zeros((4, 1))), 0.3)

    def test_zero_learning_rate_predicts_base_rate(self):
        X, y = separable()
        m = BoostedTreesClassifier(learning_rate=0.0).fit(X, y)
        np.testing.assert_allclose(predict_proba(m, X), y[: int(len(y) * 0.9)].mean(), atol=0.05)
        assert np.ptp(predict_proba(m, X)) == 0

    def test_bit_reproducible(self):
        X, y = separable(seed=3)
        a = predict_proba(train_gbm(X, y, seed=5), X)
        b = predict_proba(train_gbm(X, y, seed=5), X)
        assert a.tobytes() == b.tobytes()

    def test_wrong_width(self):
        X, y = separable()
        with pytest.raises(DimensionMismatch):
            predict_proba(train_gbm(X, y), np.zeros((2, 3)))

    def test_regressor_fits_step(self):
        x = np.linspace(-1, 1, 200)[:, None]
        y = np.where(x[:, 0] > 0, 2.0, -1.0)
        pred = BoostedTreesRegressor().fit(x, y).predict(x)
        assert np.mean((pred - y) ** 2) < 0.05


class TestNeural:
    def test_xor(self):
        rng = np.random.default_rng(0)
        X = rng.uniform(-1, 1, size=(400, 2))
        y = ((X[:, 0] > 0) ^ (X[:, 1] > 0)).astype(int)
        m = train_nn(X, y, seed=0)
        assert auc(predict_proba(m, X), y) >= 0.95

    def test_constant_target(self):
        with pytest.raises(DegenerateTarget):
            train_nn(np.zeros((30, 2)), np.zeros(30))

    def test_zero_weights_predict_half(self):
        m = ReluNetClassifier.from_weights(np.zeros((3, 256)), np.zeros(256), np.zeros(256), 0.0)
        np.testing.assert_array_equal(predict_proba(m, np.ones((5, 3))), 0.5)

    def test_hidden_width_and_relu(self):
        X, y = separable()
        m = train_nn(X, y)
        H = m.hidden_activations(X)
        assert H.shape == (len(X), 256) and H.min() >= 0

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(0)
        p, h, n = 4, 256, 30
        params = {
            "W1": rng.normal(scale=0.5, size=(p, h)), "b1": rng.normal(scale=0.1, size=h),
            "w2": rng.normal(scale=0.5, size=h), "b2": np.array(0.1),
        }
        X, y = rng.normal(size=(n, p)), rng.integers(0, 2, n)
        _, grads = loss_and_gradients(params, X, y)
        worst = 0.0
        for _ in range(50):
            name = rng.choice(list(params))
            arr = params[name]
            idx = tuple(rng.integers(0, s) for s in arr.shape)
            old = arr[idx]
            arr[idx] = old + 1e-5
            up, _ = loss_and_gradients(params, X, y)
            arr[idx] = old - 1e-5
            down, _ = loss_and_gradients(params, X, y)
            arr[idx] = old
            numeric = (up - down) / 2e-5
            analytic = grads[name][idx]
            worst = max(worst, abs(numeric - analytic) / max(abs(numeric), abs(analytic), 1e-8))
        assert worst < 1e-4

    def test_bit_reproducible(self):
        X, y = separable(seed=2)
        a = train_nn(X, y, seed=3).params_
        b = train_nn(X, y, seed=3).params_
        assert all(a[k].tobytes() == b[k].tobytes() for k in a)


class TestForest:
    def test_signal_beats_noise(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(500, 2))
        imp = train_forest(X, (X[:, 0] > 0).astype(int), seed=0).feature_importances_
        assert imp[0] > imp[1]
        assert imp.sum() == pytest.approx(1.0)

    def test_single_feature(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(100, 1))
        imp = train_forest(X, (X[:, 0] > 0).astype(int)).feature_importances_
        assert imp.tolist() == [1.0]

    def test_noise_target_spreads_importance(self):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            imp = train_forest(rng.normal(size=(300, 5)), rng.integers(0, 2, 300), seed=seed).feature_importances_
            assert imp.max() < 0.8

    def test_constant_target(self):
        with pytest.raises(DegenerateTarget):
            train_forest(np.zeros((10, 2)), np.zeros(10))
