"""
ROCKET 随机卷积核变换
生成随机膨胀卷积核，对每条序列输出 (最大值, 正值比例) 两个特征
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from numba import njit

logger = logging.getLogger(__name__)

KERNEL_LENGTHS = (7, 9, 11)


@dataclass(frozen=True)
class RocketKernel:
    """单个随机卷积核"""

    length: int
    weights: np.ndarray
    bias: float
    dilation: int
    padding: bool

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if len(w) != self.length:
            raise ValueError(f"权重长度 {len(w)} 与核长度 {self.length} 不一致")
        if self.dilation < 1:
            raise ValueError(f"膨胀系数必须 >= 1: {self.dilation}")
        object.__setattr__(self, "weights", w)

    @property
    def pad_amount(self) -> int:
        """两侧补零长度"""
        return ((self.length - 1) * self.dilation) // 2 if self.padding else 0

    @property
    def span(self) -> int:
        """膨胀后的感受野长度"""
        return (self.length - 1) * self.dilation + 1


@dataclass
class RocketConfig:
    num_kernels: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.num_kernels < 1:
            raise ValueError(f"num_kernels 必须 >= 1: {self.num_kernels}")


def generate_kernels(config: RocketConfig, input_len: int) -> list[RocketKernel]:
    """
    由种子生成随机卷积核

    长度在 {7,9,11} 中均匀抽取；权重标准正态后去均值；偏置 U[-1,1]；
    膨胀系数 ⌊2^a⌋，a ~ U[0, log2((L-1)/(len-1))]（上界截断到 0）；补零与否各 1/2。
    核跨度超过输入长度时强制补零

    Args:
        config: 核数量与种子
        input_len: 输入序列长度（>= 7）

    Returns:
        RocketKernel 列表
    """
    if input_len < 7:
        raise ValueError(f"ROCKET 输入长度必须 >= 7，实际为 {input_len}")

    rng = np.random.default_rng(config.seed)
    kernels = []
    for _ in range(config.num_kernels):
        length = int(rng.choice(KERNEL_LENGTHS))
        weights = rng.normal(0.0, 1.0, length)
        weights = weights - weights.mean()
        bias = float(rng.uniform(-1.0, 1.0))
        upper = max(0.0, math.log2((input_len - 1) / (length - 1)))
        dilation = max(1, int(2.0 ** rng.uniform(0.0, upper)))
        padding = bool(rng.integers(2) == 1)
        if (length - 1) * dilation + 1 > input_len:
            padding = True
        kernels.append(RocketKernel(length, weights, bias, dilation, padding))
    return kernels


@njit(nogil=True)
def _apply_kernel(x, weights, length, bias, dilation, padding):
    n = len(x)
    output_length = n + 2 * padding - (length - 1) * dilation
    end = n + padding - (length - 1) * dilation
    n_positive = 0
    best = -np.inf
    for i in range(-padding, end):
        total = bias
        index = i
        for j in range(length):
            if index > -1 and index < n:
                total = total + weights[j] * x[index]
            index = index + dilation
        if total > best:
            best = total
        if total > 0:
            n_positive += 1
    return best, n_positive / output_length


@njit(nogil=True)
def _apply_kernels(x, weights, lengths, biases, dilations, paddings):
    out = np.zeros(2 * len(lengths), dtype=np.float64)
    offset = 0
    for k in range(len(lengths)):
        stop = offset + lengths[k]
        best, ppv = _apply_kernel(
            x, weights[offset:stop], lengths[k], biases[k], dilations[k], paddings[k]
        )
        out[2 * k] = best
        out[2 * k + 1] = ppv
        offset = stop
    return out


def apply_kernel(series, kernel: RocketKernel) -> tuple[float, float]:
    """
    单核卷积

    Returns:
        (最大输出, 输出 > 0 的比例)
    """
    x = np.ascontiguousarray(series, dtype=np.float64).reshape(-1)
    pad = kernel.pad_amount
    if len(x) + 2 * pad - (kernel.length - 1) * kernel.dilation <= 0:
        raise ValueError(
            f"卷积核跨度 {kernel.span} 超过补零后序列长度 {len(x) + 2 * pad}，无有效位置"
        )
    best, ppv = _apply_kernel(
        x, kernel.weights, kernel.length, kernel.bias, kernel.dilation, pad
    )
    return float(best), float(ppv)


class _PackedKernels:
    """numba 内核使用的扁平数组形式"""

    def __init__(self, kernels: list[RocketKernel]):
        self.weights = np.concatenate([k.weights for k in kernels]).astype(np.float64)
        self.lengths = np.array([k.length for k in kernels], dtype=np.int64)
        self.biases = np.array([k.bias for k in kernels], dtype=np.float64)
        self.dilations = np.array([k.dilation for k in kernels], dtype=np.int64)
        self.paddings = np.array([k.pad_amount for k in kernels], dtype=np.int64)

    def min_input_len(self) -> int:
        """所有核至少有一个有效位置所需的最短长度"""
        return int(np.max((self.lengths - 1) * self.dilations - 2 * self.paddings + 1))

    def transform_one(self, x: np.ndarray) -> np.ndarray:
        return _apply_kernels(
            x, self.weights, self.lengths, self.biases, self.dilations, self.paddings
        )


def rocket_feature_names(n_kernels: int, prefix: str = "") -> list[str]:
    """列名 k0_max, k0_ppv, k1_max, ..."""
    names = []
    for i in range(n_kernels):
        names.extend([f"{prefix}k{i}_max", f"{prefix}k{i}_ppv"])
    return names


def rocket_transform(
    series_list: list,
    kernels: list[RocketKernel],
    ids: list[str] | None = None,
    n_jobs: int = 1,
) -> pd.DataFrame:
    """
    对一组序列应用全部卷积核

    Args:
        series_list: 一维序列列表（每条长度 >= 2）
        kernels: 卷积核
        ids: 行索引（事件 ID），默认 0..n-1
        n_jobs: 并行线程数；输出行顺序始终与输入一致

    Returns:
        n × 2K 特征矩阵，列顺序 (k0_max, k0_ppv, k1_max, ...)
    """
    if not kernels:
        raise ValueError("卷积核列表不能为空")
    ids = [str(i) for i in range(len(series_list))] if ids is None else list(ids)
    if len(ids) != len(series_list):
        raise ValueError(f"ids 数量 {len(ids)} 与序列数量 {len(series_list)} 不一致")

    packed = _PackedKernels(kernels)
    need = max(2, packed.min_input_len())
    arrays = []
    for event_id, series in zip(ids, series_list):
        x = np.ascontiguousarray(series, dtype=np.float64).reshape(-1)
        if len(x) < need:
            raise ValueError(f"事件 {event_id}: 序列长度 {len(x)} 不足，至少需要 {need}")
        arrays.append(x)

    rows = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(packed.transform_one)(x) for x in arrays
    )
    matrix = np.vstack(rows) if rows else np.zeros((0, 2 * len(kernels)))
    return pd.DataFrame(
        matrix, index=pd.Index(ids, name="event_id"), columns=rocket_feature_names(len(kernels))
    )


def kernels_to_state(kernels: list[RocketKernel]) -> dict:
    """导出卷积核为数组（写入模型包）"""
    packed = _PackedKernels(kernels)
    return {
        "weights": packed.weights.astype("<f8"),
        "lengths": packed.lengths.astype("<i8"),
        "biases": packed.biases.astype("<f8"),
        "dilations": packed.dilations.astype("<i8"),
        "padding": np.array([k.padding for k in kernels], dtype="<i8"),
    }


def kernels_from_state(state: dict) -> list[RocketKernel]:
    kernels = []
    offset = 0
    for length, bias, dilation, padding in zip(
        state["lengths"], state["biases"], state["dilations"], state["padding"]
    ):
        stop = offset + int(length)
        kernels.append(
            RocketKernel(
                int(length),
                np.array(state["weights"][offset:stop], dtype=np.float64),
                float(bias),
                int(dilation),
                bool(padding),
            )
        )
        offset = stop
    return kernels
