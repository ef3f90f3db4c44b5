"""
统计特征库
对单条一维序列计算能量、峰度、傅里叶熵、CWT 峰值数等特征
"""

import logging
import math

import numpy as np
from scipy import ndimage, signal, stats

logger = logging.getLogger(__name__)

STAT_FEATURE_NAMES = (
    "energy",
    "absolute_maximum",
    "count_above_mean",
    "fourier_entropy",
    "kurtosis_g2",
    "longest_strike_above_mean",
    "variation_coefficient",
    "count_above_s",
    "number_cwt_peaks",
    "pct_reoccurring_datapoints",
)

# 峰度与傅里叶熵需要的最短长度
MIN_LENGTH_SHAPE = 4


def _check(values) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64).reshape(-1)
    if len(x) == 0:
        raise ValueError("特征计算输入不能为空")
    return x


def energy(values) -> float:
    """绝对能量：平方和"""
    x = _check(values)
    return float(np.dot(x, x))


def absolute_maximum(values) -> float:
    x = _check(values)
    return float(np.max(np.abs(x)))


def count_above_mean(values) -> int:
    """大于均值的点数"""
    x = _check(values)
    return int(np.count_nonzero(x > x.mean()))


def longest_strike_above_mean(values) -> int:
    """大于均值的最长连续子序列长度"""
    x = _check(values)
    above = x > x.mean()
    best = run = 0
    for flag in above:
        run = run + 1 if flag else 0
        best = max(best, run)
    return best


def _is_constant(x: np.ndarray) -> bool:
    """按相对尺度判断常数序列（大取值时 std 的舍入噪声不计）"""
    return bool(np.ptp(x) == 0 or x.std() <= 1e-12 * max(1.0, abs(x.mean())))


def _finite(value: float) -> float:
    return float(value) if math.isfinite(value) else 0.0


def variation_coefficient(values) -> float:
    """变异系数 sd/mean；常数序列或均值接近 0 时返回 0"""
    x = _check(values)
    mean = x.mean()
    if abs(mean) < 1e-12 or _is_constant(x):
        return 0.0
    return _finite(x.std() / mean)


def kurtosis_g2(values) -> float:
    """调整后的 Fisher-Pearson 峰度 G2；长度不足 4 或常数序列返回 0"""
    x = _check(values)
    if len(x) < MIN_LENGTH_SHAPE or _is_constant(x):
        return 0.0
    return _finite(stats.kurtosis(x, fisher=True, bias=False))


def count_above(values, s: float) -> float:
    """严格大于 s 的比例"""
    x = _check(values)
    return float(np.count_nonzero(x > s) / len(x))


def pct_reoccurring_datapoints(values) -> float:
    """出现不止一次的取值所占的数据点比例"""
    x = _check(values)
    _, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
    return float(np.count_nonzero(counts[inverse] > 1) / len(x))


def fourier_entropy(values, bins: int = 10) -> float:
    """
    功率谱密度的分箱熵

    周期图 PSD 归一化为和 1，在 [0, max] 上等宽分 `bins` 箱，
    以每箱 PSD 质量计算香农熵（自然对数），空箱不计
    """
    x = _check(values)
    if len(x) < MIN_LENGTH_SHAPE:
        raise ValueError(f"傅里叶熵需要长度 >= {MIN_LENGTH_SHAPE}，实际为 {len(x)}")
    _, psd = signal.periodogram(x, detrend=False)
    total = psd.sum()
    if total <= 0:
        return 0.0
    psd = psd / total
    mass, _ = np.histogram(psd, bins=bins, range=(0.0, psd.max()), weights=psd)
    mass = mass[mass > 0]
    return float(-np.sum(mass * np.log(mass)))


def ricker(half_width: int, a: float) -> np.ndarray:
    """Ricker（墨西哥帽）小波，采样点 t = -half_width..half_width"""
    t = np.arange(-half_width, half_width + 1, dtype=np.float64)
    amp = 2.0 / (math.sqrt(3.0 * a) * math.pi**0.25)
    return amp * (1.0 - (t / a) ** 2) * np.exp(-(t**2) / (2.0 * a**2))


def _ridge_points(x: np.ndarray, width: int) -> np.ndarray:
    half = min(5 * width, (len(x) - 1) // 2)
    smoothed = ndimage.convolve1d(x, ricker(half, width), mode="nearest")
    inner = smoothed[1:-1]
    is_peak = (inner > smoothed[:-2]) & (inner > smoothed[2:]) & (inner > 0)
    return np.nonzero(is_peak)[0] + 1


def number_cwt_peaks(values, max_width: int = 5) -> int:
    """
    CWT 脊线峰值数

    宽度 1..W 的 Ricker 平滑序列上取严格局部极大值，从最大宽度向小宽度连接成脊线
    （允许跳过 1 个宽度），出现在至少 ⌈W/2⌉ 个宽度上的脊线计为一个峰
    """
    x = np.asarray(values, dtype=np.float64).reshape(-1)
    if len(x) < 3:
        return 0

    points = {w: _ridge_points(x, w) for w in range(1, max_width + 1)}
    # 每条脊线: [最近位置, 最近宽度, 出现宽度数]
    ridges: list[list[int]] = []
    for w in range(max_width, 0, -1):
        claimed: set[int] = set()
        tol = max(1, math.ceil(w / 4))
        for ridge in sorted(ridges, key=lambda r: r[0]):
            if ridge[1] - w > 2:
                continue
            candidates = [p for p in points[w] if abs(p - ridge[0]) <= tol and p not in claimed]
            if not candidates:
                continue
            best = min(candidates, key=lambda p: (abs(p - ridge[0]), p))
            claimed.add(best)
            ridge[0], ridge[1], ridge[2] = int(best), w, ridge[2] + 1
        for p in points[w]:
            if p not in claimed:
                ridges.append([int(p), w, 1])

    min_length = math.ceil(max_width / 2)
    return sum(1 for r in ridges if r[2] >= min_length)


def stat_features(values, s: float = 0.0) -> dict[str, float]:
    """
    计算完整统计特征集

    Args:
        values: 一维序列
        s: count_above 的阈值

    Returns:
        有序特征字典（键见 STAT_FEATURE_NAMES）
    """
    x = _check(values)
    short = len(x) < MIN_LENGTH_SHAPE
    if short:
        logger.debug(f"序列长度 {len(x)} 过短，峰度与傅里叶熵记为 0")
    return {
        "energy": energy(x),
        "absolute_maximum": absolute_maximum(x),
        "count_above_mean": float(count_above_mean(x)),
        "fourier_entropy": 0.0 if short else fourier_entropy(x),
        "kurtosis_g2": kurtosis_g2(x),
        "longest_strike_above_mean": float(longest_strike_above_mean(x)),
        "variation_coefficient": variation_coefficient(x),
        "count_above_s": count_above(x, s),
        "number_cwt_peaks": float(number_cwt_peaks(x)),
        "pct_reoccurring_datapoints": pct_reoccurring_datapoints(x),
    }
