"""
单元测试 - 时序工具
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tsfex_core.series import dtw_distance, magnitude, pad_series, resample_series, znormalize

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)


def brute_dtw(a, b) -> float:
    """O(nm) 动态规划参考实现"""
    n, m = len(a), len(b)
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            cost = abs(a[i - 1] - b[j - 1])
            acc[i, j] = cost + min(acc[i - 1, j], acc[i, j - 1], acc[i - 1, j - 1])
    return float(acc[n, m])


class TestResample:
    """重采样测试"""

    def test_upsample_linear(self):
        np.testing.assert_allclose(resample_series([0.0, 2.0], 3), [0.0, 1.0, 2.0])

    def test_endpoints_preserved(self, rng):
        x = rng.normal(size=17)
        y = resample_series(x, 50)
        assert len(y) == 50
        assert y[0] == x[0] and y[-1] == x[-1]

    def test_identity_length(self, rng):
        x = rng.normal(size=10)
        np.testing.assert_allclose(resample_series(x, 10), x)

    @pytest.mark.parametrize("values,target", [([1.0], 4), ([1.0, 2.0], 1)])
    def test_invalid(self, values, target):
        with pytest.raises(ValueError):
            resample_series(values, target)


class TestPad:
    """补零测试"""

    def test_pad(self):
        np.testing.assert_array_equal(pad_series([1.0, 2.0], 4), [1.0, 2.0, 0.0, 0.0])

    def test_too_long(self):
        with pytest.raises(ValueError):
            pad_series([1.0, 2.0, 3.0], 2)


class TestZnormalize:
    """z 标准化测试"""

    def test_constant_series_is_zero(self):
        np.testing.assert_array_equal(znormalize([3.0, 3.0, 3.0]), [0.0, 0.0, 0.0])

    def test_large_constant_series_is_zero(self):
        np.testing.assert_array_equal(znormalize(np.full(23, -9433.6)), np.zeros(23))

    def test_empty(self):
        with pytest.raises(ValueError):
            znormalize([])

    @given(arrays(np.float64, st.integers(2, 40), elements=finite))
    @settings(max_examples=50, deadline=None)
    def test_zero_mean_unit_sd(self, x):
        """测试输出均值 0、标准差 1（常数序列为全零）"""
        z = znormalize(x)
        if x.std() < 1e-9:
            return
        assert abs(z.mean()) < 1e-9
        assert abs(z.std() - 1.0) < 1e-9

    @given(arrays(np.float64, st.integers(2, 20), elements=finite))
    @settings(max_examples=30, deadline=None)
    def test_idempotent(self, x):
        z = znormalize(x)
        np.testing.assert_allclose(znormalize(z), z, atol=1e-9)


class TestDtw:
    """DTW 距离测试"""

    def test_identical_is_zero(self):
        assert dtw_distance([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0

    def test_time_shift_absorbed(self):
        assert dtw_distance([0.0, 1.0, 2.0], [0.0, 0.0, 1.0, 2.0]) == 0.0

    def test_matches_brute_force(self, rng):
        for _ in range(20):
            a = rng.normal(size=rng.integers(1, 12))
            b = rng.normal(size=rng.integers(1, 12))
            assert dtw_distance(a, b) == pytest.approx(brute_dtw(a, b), rel=1e-9, abs=1e-12)

    @given(
        arrays(np.float64, st.integers(1, 10), elements=finite),
        arrays(np.float64, st.integers(1, 10), elements=finite),
    )
    @settings(max_examples=40, deadline=None)
    def test_symmetric(self, a, b):
        assert dtw_distance(a, b) == pytest.approx(dtw_distance(b, a), rel=1e-9, abs=1e-9)

    def test_empty(self):
        with pytest.raises(ValueError):
            dtw_distance([], [1.0])


class TestMagnitude:
    def test_three_axis(self):
        np.testing.assert_allclose(magnitude(np.array([[3.0, 4.0, 0.0], [0.0, 0.0, 2.0]])), [5, 2])

    def test_one_dimensional_passthrough(self):
        np.testing.assert_array_equal(magnitude(np.array([1.0, -2.0])), [1.0, -2.0])
