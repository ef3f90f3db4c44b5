"""
单元测试 - 归一化与常数列剔除
"""

import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsfex_core.features.normalizer import (
    NormStats,
    apply_normalizer,
    drop_constant_features,
    fit_normalizer,
)


class TestNormalizer:
    """min-max 归一化测试"""

    @pytest.fixture
    def stats(self):
        return fit_normalizer(pd.DataFrame({"rssi": [-80.0, -40.0], "c": [1.0, 1.0]}))

    def test_midpoint(self, stats):
        assert apply_normalizer(stats, {"rssi": -60.0})["rssi"] == 0.5

    def test_clamped(self, stats):
        assert apply_normalizer(stats, {"rssi": -100.0})["rssi"] == 0.0
        assert apply_normalizer(stats, {"rssi": 0.0})["rssi"] == 1.0

    def test_constant_feature(self, stats):
        assert apply_normalizer(stats, {"c": 7.0})["c"] == 0.0

    def test_unknown_feature_passthrough(self, stats):
        assert apply_normalizer(stats, {"other": 3.0}) == {"other": 3.0}

    def test_empty_training(self):
        with pytest.raises(ValueError):
            fit_normalizer(pd.DataFrame({"a": []}))

    def test_invalid_range(self):
        with pytest.raises(ValueError):
            NormStats({"a": (2.0, 1.0)})

    def test_state_round_trip(self, stats):
        assert NormStats.from_state(stats.get_state()) == stats

    @given(st.floats(-1e6, 1e6), st.floats(-1e3, 1e3), st.floats(0.0, 1e3))
    @settings(max_examples=100, deadline=None)
    def test_output_in_unit_interval(self, value, lo, width):
        stats = NormStats({"a": (lo, lo + width)})
        assert 0.0 <= apply_normalizer(stats, {"a": value})["a"] <= 1.0


class TestDropConstant:
    """常数列剔除测试"""

    def test_removes_constant(self):
        matrix = pd.DataFrame({"a": [3.7, 3.7, 3.7], "b": [0.0, 1.0, 0.0]})
        kept, removed = drop_constant_features(matrix)
        assert list(kept.columns) == ["b"]
        assert removed == ["a"]

    def test_all_constant(self):
        matrix = pd.DataFrame({"a": [1.0, 1.0], "b": [2.0, 2.0]})
        kept, removed = drop_constant_features(matrix)
        assert kept.shape == (2, 0)
        assert removed == ["a", "b"]
