"""
单元测试 - 提升树
"""

import numpy as np
import pytest

from tsfex_core.gbdt import (
    GbdtConfig,
    GbdtModel,
    gbdt_predict_distance,
    gbdt_predict_proba,
    gbdt_train,
    proba_to_distance,
)


@pytest.fixture
def three_class(rng):
    """三个可分的距离类别，外加一列噪声特征"""
    centers = {1.0: 0.0, 2.0: 5.0, 3.0: 10.0}
    rows, labels = [], []
    for distance, center in centers.items():
        for _ in range(12):
            rows.append([center + rng.normal(0, 0.3), rng.normal()])
            labels.append(distance)
    return np.array(rows), np.array(labels)


class TestGbdtConfig:
    def test_defaults_valid(self):
        assert GbdtConfig().n_trees == 100

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_trees": 0},
            {"max_depth": 0},
            {"learning_rate": 0.0},
            {"l2_lambda": -1.0},
            {"subsample": 0.0},
            {"colsample": 1.5},
            {"min_child_weight": -0.1},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            GbdtConfig(**kwargs)


class TestGbdtTrain:
    """训练测试"""

    def test_separable_single_feature(self):
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        y = np.array([1.0, 1.0, 3.0, 3.0])
        model = gbdt_train(X, y, GbdtConfig(n_trees=20))
        np.testing.assert_array_equal(gbdt_predict_distance(model, X), y)

    def test_stump_threshold_and_leaf_weight(self):
        """测试单棵树桩：阈值取中点，叶权重 -G/(H+λ)·η"""
        X = np.array([[0.0], [2.0]])
        y = np.array([1.0, 2.0])
        config = GbdtConfig(n_trees=1, max_depth=1, min_child_weight=0.0)
        tree = gbdt_train(X, y, config).trees[0][0]
        assert tree.feature[0] == 0
        assert tree.threshold[0] == 1.0
        assert tree.value[tree.left[0]] == pytest.approx(0.5 / 1.5 * 0.1)
        assert tree.value[tree.right[0]] == pytest.approx(-0.5 / 1.5 * 0.1)

    def test_three_classes(self, three_class):
        X, y = three_class
        model = gbdt_train(X, y, GbdtConfig(n_trees=30, max_depth=2))
        assert model.n_classes == 3
        assert np.mean(gbdt_predict_distance(model, X) == y) == 1.0

    def test_loss_decreases(self, three_class):
        X, y = three_class
        model = gbdt_train(X, y, GbdtConfig(n_trees=15, max_depth=2))
        assert len(model.train_loss) == 16
        assert model.train_loss[0] == pytest.approx(np.log(3))
        assert model.train_loss[-1] < model.train_loss[0]

    def test_depth_limit(self, three_class):
        X, y = three_class
        model = gbdt_train(X, y, GbdtConfig(n_trees=5, max_depth=2))
        assert all(t.n_leaves <= 4 for round_trees in model.trees for t in round_trees)

    def test_deterministic_with_sampling(self, three_class):
        X, y = three_class
        config = GbdtConfig(n_trees=10, subsample=0.7, colsample=0.5, seed=11)
        assert gbdt_train(X, y, config).to_bytes() == gbdt_train(X, y, config).to_bytes()

    def test_thread_count_independent(self, three_class):
        X, y = three_class
        config = GbdtConfig(n_trees=8, max_depth=3)
        one = gbdt_train(X, y, config, n_jobs=1)
        many = gbdt_train(X, y, config, n_jobs=2)
        assert one.to_bytes() == many.to_bytes()

    def test_single_class(self):
        X = np.array([[0.0], [1.0], [2.0]])
        model = gbdt_train(X, np.full(3, 4.0))
        assert model.trees == []
        np.testing.assert_array_equal(gbdt_predict_distance(model, X), [4.0, 4.0, 4.0])

    def test_declared_class_without_samples(self):
        with pytest.raises(ValueError):
            gbdt_train([[0.0], [1.0]], [1.0, 2.0], classes=[1.0, 2.0, 3.0])

    def test_label_outside_classes(self):
        with pytest.raises(ValueError):
            gbdt_train([[0.0], [1.0]], [1.0, 5.0], classes=[1.0])

    def test_non_finite_features(self):
        with pytest.raises(ValueError):
            gbdt_train([[0.0], [np.nan]], [1.0, 2.0])

    def test_too_few_rows(self):
        with pytest.raises(ValueError):
            gbdt_train([[0.0]], [1.0])


class TestGbdtPredict:
    """预测测试"""

    def test_proba_rows_sum_to_one(self, three_class):
        X, y = three_class
        model = gbdt_train(X, y, GbdtConfig(n_trees=5))
        proba = gbdt_predict_proba(model, X)
        np.testing.assert_allclose(proba.sum(axis=1), 1.0)
        assert np.all(proba >= 0)

    def test_feature_count_mismatch(self, three_class):
        X, y = three_class
        model = gbdt_train(X, y, GbdtConfig(n_trees=2))
        with pytest.raises(ValueError):
            gbdt_predict_proba(model, X[:, :1])

    def test_tie_prefers_smaller_distance(self):
        proba = np.array([[0.5, 0.5], [0.2, 0.8]])
        np.testing.assert_array_equal(proba_to_distance(proba, [3.0, 1.0]), [1.0, 1.0])

    def test_state_round_trip(self, three_class):
        X, y = three_class
        model = gbdt_train(X, y, GbdtConfig(n_trees=6, max_depth=2))
        restored = GbdtModel.from_state(model.get_state())
        assert restored.to_bytes() == model.to_bytes()
        np.testing.assert_array_equal(
            gbdt_predict_proba(restored, X), gbdt_predict_proba(model, X)
        )


def exhaustive_root_split(X, y, config):
    """穷举所有特征与相邻取值中点，返回首轮首类树根的 (特征, 阈值, 增益)"""
    classes = np.unique(y)
    p0 = 1.0 / len(classes)
    g = p0 - (y == classes[0]).astype(float)
    h = np.full(len(y), 2.0 * p0 * (1.0 - p0))
    lam = config.l2_lambda
    G, H = g.sum(), h.sum()
    best = (-1, 0.0, 0.0)
    for j in range(X.shape[1]):
        values = np.unique(X[:, j])
        for lo, hi in zip(values[:-1], values[1:]):
            t = 0.5 * (lo + hi)
            left = X[:, j] <= t
            GL, HL = g[left].sum(), h[left].sum()
            GR, HR = G - GL, H - HL
            if HL < config.min_child_weight or HR < config.min_child_weight:
                continue
            gain = 0.5 * (GL**2 / (HL + lam) + GR**2 / (HR + lam) - G**2 / (H + lam))
            gain -= config.min_split_gain
            if gain > best[2] + 1e-12:
                best = (j, t, gain)
    return best


class TestGbdtProperties:
    """随机数据上的训练性质"""

    @pytest.mark.parametrize("seed", range(20))
    def test_loss_non_increasing(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(40, 3))
        y = rng.choice([1.2, 1.8, 3.0], size=40)
        y[:3] = [1.2, 1.8, 3.0]
        model = gbdt_train(X, y, GbdtConfig(n_trees=20, max_depth=3, learning_rate=0.1))
        assert np.all(np.diff(model.train_loss) <= 1e-12)

    @pytest.mark.parametrize("seed", range(50))
    def test_root_split_matches_exhaustive_search(self, seed):
        rng = np.random.default_rng(1000 + seed)
        n = int(rng.integers(6, 21))
        X = rng.normal(size=(n, 3))
        y = np.where(rng.random(n) < 0.5, 1.0, 4.5)
        y[:2] = [1.0, 4.5]
        config = GbdtConfig(n_trees=1, max_depth=1)
        tree = gbdt_train(X, y, config).trees[0][0]
        feature, threshold, _ = exhaustive_root_split(X, y, config)
        assert tree.feature[0] == feature
        if feature >= 0:
            assert tree.threshold[0] == pytest.approx(threshold)

    def test_separable_stumps_reach_full_accuracy(self):
        X = np.linspace(0.0, 1.0, 100).reshape(-1, 1)
        y = np.where(X[:, 0] < 0.5, 1.2, 4.5)
        model = gbdt_train(X, y, GbdtConfig(n_trees=20, max_depth=1))
        assert np.mean(gbdt_predict_distance(model, X) == y) == 1.0
