"""
单元测试 - 贝叶斯超参数优化
"""

import math

import numpy as np
import pytest

from tsfex_core.bayes_tuner import (
    GBDT_SEARCH_SPACE,
    GpHyper,
    Param,
    SearchSpace,
    expected_improvement,
    fit_hyper,
    gp_posterior,
    tune,
)
from tsfex_core.gbdt import GbdtConfig

LINE = SearchSpace((Param("x", 0.0, 1.0),))


class TestParam:
    """搜索范围测试"""

    def test_log_scale_midpoint(self):
        assert Param("a", 1.0, 100.0, scale="log").from_unit(0.5) == pytest.approx(10.0)

    def test_integer_rounding(self):
        assert Param("n", 2, 8, integer=True).from_unit(0.52) == 5

    def test_clamped(self):
        param = Param("a", 0.0, 2.0)
        assert param.from_unit(1.7) == 2.0
        assert param.to_unit(-3.0) == 0.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"lower": 1.0, "upper": 1.0},
            {"lower": 0.0, "upper": 1.0, "scale": "log"},
            {"lower": 0.0, "upper": 1.0, "scale": "sqrt"},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            Param("a", **kwargs)

    def test_gbdt_space_yields_valid_config(self):
        for u in (0.0, 0.5, 1.0):
            GbdtConfig(**GBDT_SEARCH_SPACE.denormalize([u] * GBDT_SEARCH_SPACE.dim))


class TestGaussianProcess:
    """GP 后验测试"""

    HYPER = GpHyper(length_scale=0.2, signal_var=1.0, noise_var=1e-6)

    def test_interpolates_observations(self):
        X = np.array([[0.1], [0.5], [0.9]])
        y = np.array([1.0, -1.0, 0.5])
        mean, var = gp_posterior(X, y, X, self.HYPER)
        np.testing.assert_allclose(mean, y, atol=1e-4)
        assert np.all(var < 1e-4)

    def test_reverts_to_prior_far_away(self):
        mean, var = gp_posterior([[0.0]], [2.0], [[10.0]], self.HYPER, prior_mean=0.5)
        assert mean[0] == pytest.approx(0.5)
        assert var[0] == pytest.approx(1.0)

    def test_duplicate_points(self):
        X = np.array([[0.3], [0.3], [0.3]])
        mean, var = gp_posterior(X, [1.0, 1.0, 1.0], [[0.3]], self.HYPER)
        assert mean[0] == pytest.approx(1.0, abs=1e-3)
        assert var[0] >= 0.0

    def test_noise_floor(self):
        with pytest.raises(ValueError):
            gp_posterior([[0.0]], [1.0], [[0.0]], GpHyper(0.2, 1.0, 1e-10))

    def test_fit_hyper_from_grid(self, rng):
        X = rng.random((8, 2))
        hyper = fit_hyper(X, np.sin(3 * X[:, 0]))
        assert hyper.noise_var >= 1e-6


class TestExpectedImprovement:
    def test_zero_sd(self):
        assert expected_improvement([0.0], [0.0], 1.0)[0] == 0.0

    def test_at_incumbent(self):
        ei = expected_improvement([1.0], [1.0], 1.0)[0]
        assert ei == pytest.approx(1.0 / math.sqrt(2 * math.pi))

    def test_monotone_in_mean(self):
        ei = expected_improvement([0.0, 0.5, 1.0], [0.3, 0.3, 0.3], 0.5)
        assert ei[0] > ei[1] > ei[2]


class TestTune:
    """序贯优化测试"""

    def test_finds_quadratic_minimum(self):
        result = tune(lambda p: (p["x"] - 0.3) ** 2, LINE, budget=20, n_init=4, seed=0)
        assert result.best.objective < 0.01
        assert len(result.history) == 20

    def test_initial_config_first(self):
        result = tune(lambda p: p["x"], LINE, budget=4, n_init=2, initial_configs=[{"x": 0.5}])
        assert result.history[0].params == {"x": 0.5}

    def test_failures_become_inf(self):
        def objective(params):
            if params["x"] > 0.5:
                raise RuntimeError("boom")
            return params["x"]

        result = tune(objective, LINE, budget=8, n_init=4, seed=1)
        assert len(result.history) == 8
        assert math.isfinite(result.best.objective)
        assert all(math.isinf(t.objective) for t in result.history if t.params["x"] > 0.5)
        assert result.best.params["x"] <= 0.5

    def test_all_failures(self):
        result = tune(lambda p: float("nan"), LINE, budget=3, n_init=2)
        assert all(math.isinf(t.objective) for t in result.history)
        assert result.best.index == 0

    def test_deterministic(self):
        a = tune(lambda p: abs(p["x"] - 0.7), LINE, budget=8, n_init=3, seed=5)
        b = tune(lambda p: abs(p["x"] - 0.7), LINE, budget=8, n_init=3, seed=5)
        assert [t.params for t in a.history] == [t.params for t in b.history]

    def test_invalid_budget(self):
        with pytest.raises(ValueError):
            tune(lambda p: 0.0, LINE, budget=2, n_init=3)

    def test_history_frame(self):
        result = tune(lambda p: p["x"], LINE, budget=3, n_init=2)
        frame = result.history_frame()
        assert list(frame.columns) == ["trial", "x", "objective"]
        assert len(frame) == 3


class TestTuneAcrossSeeds:
    """多种子下与随机搜索的配对比较"""

    SEEDS = range(20)
    BUDGET = 30

    @staticmethod
    def quadratic(params):
        return (params["x"] - 0.3) ** 2

    @pytest.fixture(scope="class")
    def results(self):
        return [tune(self.quadratic, LINE, budget=self.BUDGET, seed=s) for s in self.SEEDS]

    def test_reaches_minimum(self, results):
        hits = sum(abs(r.best.params["x"] - 0.3) <= 0.05 for r in results)
        assert hits >= 18

    def test_beats_random_search(self, results):
        random_best = []
        for seed in self.SEEDS:
            xs = np.random.default_rng(seed).random(self.BUDGET)
            random_best.append(min(self.quadratic({"x": x}) for x in xs))
        tuned_best = [r.best.objective for r in results]
        assert np.mean(tuned_best) < np.mean(random_best)
