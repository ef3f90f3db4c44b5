"""
时序工具
补零、重采样、z 标准化、DTW 距离、多通道幅值
"""

import librosa
import numpy as np

# 标准差低于该值视为常数序列
_CONSTANT_SD = 1e-12


def _as_1d(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"需要一维序列，实际维度为 {arr.ndim}")
    return arr


def resample_series(values, target_len: int) -> np.ndarray:
    """
    线性插值重采样到固定长度

    在原索引范围 [0, n-1] 的均匀网格上插值，端点保持不变

    Args:
        values: 一维序列（长度 >= 2）
        target_len: 目标长度（>= 2）

    Returns:
        长度为 target_len 的序列
    """
    x = _as_1d(values)
    if len(x) < 2:
        raise ValueError(f"重采样输入长度必须 >= 2，实际为 {len(x)}")
    if target_len < 2:
        raise ValueError(f"重采样目标长度必须 >= 2，实际为 {target_len}")
    grid = np.linspace(0.0, len(x) - 1, int(target_len))
    return np.interp(grid, np.arange(len(x), dtype=np.float64), x)


def pad_series(values, target_len: int) -> np.ndarray:
    """末尾补零到目标长度"""
    x = _as_1d(values)
    if len(x) > target_len:
        raise ValueError(f"序列长度 {len(x)} 超过补零目标长度 {target_len}")
    out = np.zeros(int(target_len), dtype=np.float64)
    out[: len(x)] = x
    return out


def znormalize(values) -> np.ndarray:
    """
    z 标准化（总体标准差）

    常数序列返回全零，不抛异常
    """
    x = _as_1d(values)
    if len(x) == 0:
        raise ValueError("z 标准化输入不能为空")
    mean = x.mean()
    sd = x.std()
    if np.ptp(x) == 0 or sd <= _CONSTANT_SD * max(1.0, abs(mean)):
        return np.zeros_like(x)
    return (x - mean) / sd


def dtw_distance(a, b) -> float:
    """
    经典 DTW 距离

    局部代价为绝对差，无窗口约束；使用 librosa 的动态规划实现
    """
    x = _as_1d(a)
    y = _as_1d(b)
    if len(x) == 0 or len(y) == 0:
        raise ValueError("DTW 输入不能为空")
    cost = np.abs(x[:, None] - y[None, :])
    acc = librosa.sequence.dtw(C=cost, backtrack=False)
    return float(acc[-1, -1])


def magnitude(values: np.ndarray) -> np.ndarray:
    """多通道采样的逐点欧氏幅值，一维输入原样返回"""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        return arr.copy()
    return np.sqrt(np.sum(arr * arr, axis=1))
