"""
单元测试 - 岭回归分类器
"""

import numpy as np
import pytest

from tsfex_core.ridge import (
    RidgeClassifier,
    RidgeModel,
    loo_errors,
    ridge_predict,
    ridge_train,
    select_alpha_loo,
)


def brute_force_loo(X, y, alpha) -> float:
    errors = []
    for i in range(len(X)):
        keep = np.arange(len(X)) != i
        model = ridge_train(X[keep], y[keep], alpha)
        errors.append((model.decision_function(X[i : i + 1])[0] - y[i]) ** 2)
    return float(np.mean(errors))


class TestRidgeTrain:
    """闭式解测试"""

    def test_exact_line(self):
        X = np.arange(6, dtype=float)[:, None]
        model = ridge_train(X, 2 * X[:, 0] + 1, alpha=0.0)
        assert model.weights[0] == pytest.approx(2.0)
        assert model.intercept == pytest.approx(1.0)

    def test_normal_equations(self, rng):
        X = rng.normal(size=(20, 4))
        y = rng.normal(size=20)
        model = ridge_train(X, y, alpha=2.5)
        Xc = X - X.mean(axis=0)
        lhs = (Xc.T @ Xc + 2.5 * np.eye(4)) @ model.weights
        np.testing.assert_allclose(lhs, Xc.T @ (y - y.mean()), atol=1e-9)

    def test_shrinks_with_alpha(self, rng):
        X = rng.normal(size=(30, 3))
        y = X @ np.array([1.0, -2.0, 0.5])
        small = ridge_train(X, y, alpha=0.01)
        large = ridge_train(X, y, alpha=1000.0)
        assert np.linalg.norm(large.weights) < np.linalg.norm(small.weights)

    def test_negative_alpha(self):
        with pytest.raises(ValueError):
            ridge_train([[0.0], [1.0]], [0.0, 1.0], alpha=-1.0)

    def test_zero_score_is_positive(self):
        model = RidgeModel(np.array([1.0]), 0.0, 1.0)
        np.testing.assert_array_equal(ridge_predict(model, [[0.0], [-1.0]]), [1, -1])


class TestLoo:
    """留一法测试"""

    def test_matches_brute_force(self, rng):
        X = rng.normal(size=(15, 3))
        y = rng.normal(size=15)
        alphas = [0.1, 1.0, 10.0]
        errors = loo_errors(X, y, alphas)
        for alpha, error in zip(alphas, errors):
            assert error == pytest.approx(brute_force_loo(X, y, alpha), rel=1e-8)

    def test_noise_free_prefers_smallest_alpha(self, rng):
        X = rng.normal(size=(25, 2))
        y = X @ np.array([3.0, -1.0]) + 0.5
        assert select_alpha_loo(X, y) == pytest.approx(1e-3)

    def test_too_few_rows(self):
        with pytest.raises(ValueError):
            loo_errors([[0.0]], [1.0])


class TestRidgeClassifier:
    """多类别分类测试"""

    @pytest.fixture
    def clusters(self, rng):
        rows, labels = [], []
        for distance, center in ((1.0, (0.0, 0.0)), (2.0, (6.0, 0.0)), (3.0, (3.0, 5.0))):
            rows.append(rng.normal(center, 0.2, size=(10, 2)))
            labels += [distance] * 10
        return np.vstack(rows), np.array(labels)

    def test_three_classes(self, clusters):
        X, y = clusters
        clf = RidgeClassifier().fit(X, y)
        np.testing.assert_array_equal(clf.predict(X), y)

    def test_two_classes(self, rng):
        X = np.vstack([rng.normal(-3, 0.2, size=(8, 2)), rng.normal(3, 0.2, size=(8, 2))])
        y = np.array([1.0] * 8 + [5.0] * 8)
        clf = RidgeClassifier().fit(X, y)
        assert len(clf.models) == 1
        np.testing.assert_array_equal(clf.predict(X), y)

    def test_single_class(self, rng):
        clf = RidgeClassifier().fit(rng.normal(size=(5, 2)), np.full(5, 2.0))
        np.testing.assert_array_equal(clf.predict(rng.normal(size=(3, 2))), [2.0] * 3)

    def test_constant_column_standardized(self, clusters):
        X, y = clusters
        X = np.column_stack([X, np.full(len(X), 7.0)])
        clf = RidgeClassifier().fit(X, y)
        assert clf.scale[-1] == 1.0

    def test_unfitted(self):
        with pytest.raises(RuntimeError):
            RidgeClassifier().predict([[0.0]])

    def test_state_round_trip(self, clusters, rng):
        X, y = clusters
        clf = RidgeClassifier().fit(X, y)
        restored = RidgeClassifier.from_state(clf.get_state())
        query = rng.normal(0, 3, size=(20, 2))
        np.testing.assert_array_equal(restored.predict(query), clf.predict(query))
        assert restored.alpha == clf.alpha
