"""
单元测试 - 统计特征库
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tsfex_core.features.statistics import (
    STAT_FEATURE_NAMES,
    absolute_maximum,
    count_above,
    count_above_mean,
    energy,
    fourier_entropy,
    kurtosis_g2,
    longest_strike_above_mean,
    number_cwt_peaks,
    pct_reoccurring_datapoints,
    stat_features,
    variation_coefficient,
)


# 逐项公式参考实现
def oracle_kurtosis(x):
    n = len(x)
    m = sum(x) / n
    d2 = sum((v - m) ** 2 for v in x)
    if n < 4 or d2 / n < 1e-24:
        return 0.0
    d4 = sum((v - m) ** 4 for v in x)
    k2 = d2 / (n - 1)
    return (n * (n + 1) / ((n - 1) * (n - 2) * (n - 3))) * d4 / k2**2 - 3 * (n - 1) ** 2 / (
        (n - 2) * (n - 3)
    )


def oracle_strike(x):
    m = sum(x) / len(x)
    best = 0
    for i in range(len(x)):
        j = i
        while j < len(x) and x[j] > m:
            j += 1
        best = max(best, j - i)
    return best


def oracle_reoccurring(x):
    values = list(x)
    return sum(1 for v in values if values.count(v) > 1) / len(values)


def oracle_fourier_entropy(x, bins=10):
    n = len(x)
    power = np.abs(np.fft.rfft(x)) ** 2
    if n % 2 == 0:
        power[1:-1] *= 2
    else:
        power[1:] *= 2
    power = power / power.sum()
    top = power.max()
    mass = [0.0] * bins
    for p in power:
        idx = min(int(p / top * bins), bins - 1)
        mass[idx] += p
    return -sum(m * math.log(m) for m in mass if m > 0)


class TestSimpleFeatures:
    """简单特征测试"""

    def test_energy(self):
        assert energy([1, 2, 3]) == 14

    def test_count_above_mean(self):
        assert count_above_mean([1, 2, 3]) == 1

    def test_longest_strike(self):
        assert longest_strike_above_mean([0, 5, 5, 0, 5]) == 2

    def test_absolute_maximum(self):
        assert absolute_maximum([-7, 3]) == 7

    def test_pct_reoccurring(self):
        assert pct_reoccurring_datapoints([1, 1, 2, 3]) == 0.5

    def test_kurtosis_g2(self):
        assert kurtosis_g2([1, 2, 3, 4, 5]) == pytest.approx(-1.2, abs=1e-12)

    def test_kurtosis_short_is_zero(self):
        assert kurtosis_g2([1, 2, 3]) == 0.0

    @pytest.mark.parametrize("value,n", [(-9433.6, 23), (8192.94588836, 11)])
    def test_large_constant_series(self, value, n):
        """测试大取值常数序列：舍入噪声不产生 NaN"""
        x = np.full(n, value)
        assert kurtosis_g2(x) == 0.0
        assert variation_coefficient(x) == 0.0
        assert all(np.isfinite(v) for v in stat_features(x).values())

    def test_variation_coefficient(self):
        x = np.array([1.0, 2.0, 3.0])
        assert variation_coefficient(x) == pytest.approx(x.std() / 2.0)
        assert variation_coefficient([-1.0, 1.0]) == 0.0

    @pytest.mark.parametrize(
        "values,s,expected", [([1, 2, 3], 1.5, 2 / 3), ([1, 2, 3], 3, 0.0), ([5], 0, 1.0)]
    )
    def test_count_above(self, values, s, expected):
        assert count_above(values, s) == pytest.approx(expected)

    def test_empty_rejected(self):
        for fn in (energy, absolute_maximum, count_above_mean, pct_reoccurring_datapoints):
            with pytest.raises(ValueError):
                fn([])


class TestFourierEntropy:
    """傅里叶熵测试"""

    def test_constant_series(self):
        assert fourier_entropy(np.full(16, 2.0)) == pytest.approx(0.0, abs=1e-9)

    def test_noise_above_sinusoid(self, rng):
        t = np.arange(256)
        sine = np.sin(2 * np.pi * 8 * t / 256)
        noise = rng.normal(size=256)
        assert fourier_entropy(noise) > fourier_entropy(sine)

    def test_scale_invariant(self, rng):
        x = rng.normal(size=64)
        assert fourier_entropy(3.5 * x) == pytest.approx(fourier_entropy(x), abs=1e-9)

    def test_too_short(self):
        with pytest.raises(ValueError):
            fourier_entropy([1.0, 2.0, 3.0])


class TestCwtPeaks:
    """CWT 峰值数测试"""

    def test_monotone(self):
        assert number_cwt_peaks([1, 2, 3, 4, 5]) == 0

    def test_single_bump(self):
        assert number_cwt_peaks([0, 1, 4, 1, 0]) == 1

    def test_two_bumps(self):
        x = np.zeros(30)
        x[5:10] = [1, 3, 5, 3, 1]
        x[18:23] = [1, 3, 5, 3, 1]
        assert number_cwt_peaks(x) == 2

    def test_short_series(self):
        assert number_cwt_peaks([1.0, 2.0]) == 0


class TestOracleSuite:
    """随机序列上与参考实现逐项比对"""

    def test_random_series(self, rng):
        for _ in range(1000):
            x = rng.normal(size=int(rng.integers(4, 65)))
            if rng.random() < 0.3:
                x = np.round(x, 1)
            s = float(rng.normal())
            features = stat_features(x, s=s)
            assert features["energy"] == pytest.approx(sum(v * v for v in x), rel=1e-9)
            assert features["absolute_maximum"] == max(abs(v) for v in x)
            assert features["count_above_mean"] == sum(1 for v in x if v > x.mean())
            assert features["longest_strike_above_mean"] == oracle_strike(x)
            assert features["count_above_s"] == sum(1 for v in x if v > s) / len(x)
            assert features["pct_reoccurring_datapoints"] == oracle_reoccurring(x)
            assert features["kurtosis_g2"] == pytest.approx(oracle_kurtosis(x), rel=1e-9, abs=1e-9)
            assert features["fourier_entropy"] == pytest.approx(
                oracle_fourier_entropy(x), rel=1e-9, abs=1e-9
            )


class TestStatFeatures:
    """完整特征集测试"""

    def test_names_and_order(self, rng):
        assert tuple(stat_features(rng.normal(size=10))) == STAT_FEATURE_NAMES

    def test_short_series_guards(self):
        features = stat_features([1.0, 2.0])
        assert features["kurtosis_g2"] == 0.0
        assert features["fourier_entropy"] == 0.0

    @given(arrays(np.float64, st.integers(1, 50), elements=st.floats(-1e4, 1e4)))
    @settings(max_examples=60, deadline=None)
    def test_all_finite(self, x):
        """测试任意有限输入都得到有限特征"""
        assert all(np.isfinite(v) for v in stat_features(x).values())

    def test_deterministic(self, rng):
        x = rng.normal(size=40)
        assert stat_features(x) == stat_features(x.copy())
