"""
归一化与常数列剔除
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from tsfex_core.features.base import FeatureVector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NormStats:
    """训练集上学到的逐特征 (min, max)"""

    ranges: dict[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        for name, (lo, hi) in self.ranges.items():
            if hi < lo:
                raise ValueError(f"特征 {name} 的 max({hi}) 小于 min({lo})")

    def normalize(self, name: str, value: float) -> float:
        """min-max 归一化并截断到 [0, 1]；常数特征返回 0"""
        lo, hi = self.ranges[name]
        if hi <= lo:
            return 0.0
        return float(np.clip((value - lo) / (hi - lo), 0.0, 1.0))

    def get_state(self) -> dict:
        names = list(self.ranges)
        return {
            "names": names,
            "mins": np.array([self.ranges[n][0] for n in names], dtype="<f8"),
            "maxs": np.array([self.ranges[n][1] for n in names], dtype="<f8"),
        }

    @classmethod
    def from_state(cls, state: dict) -> "NormStats":
        return cls(
            {
                n: (float(lo), float(hi))
                for n, lo, hi in zip(state["names"], state["mins"], state["maxs"])
            }
        )


def fit_normalizer(training: pd.DataFrame) -> NormStats:
    """
    在训练矩阵上学习逐列 min/max

    Args:
        training: 行为事件、列为特征的矩阵

    Returns:
        NormStats
    """
    if training.shape[0] == 0:
        raise ValueError("归一化训练集不能为空")
    mins = training.min(axis=0)
    maxs = training.max(axis=0)
    return NormStats({col: (float(mins[col]), float(maxs[col])) for col in training.columns})


def apply_normalizer(stats: NormStats, vector: FeatureVector) -> FeatureVector:
    """对 stats 中包含的特征做 min-max 归一化，其余特征原样保留"""
    return {
        name: stats.normalize(name, value) if name in stats.ranges else value
        for name, value in vector.items()
    }


def drop_constant_features(matrix: pd.DataFrame) -> tuple[pd.DataFrame, list[str]]:
    """
    剔除训练取值全部相同的特征列

    Returns:
        (剔除后的矩阵, 被剔除的列名)
    """
    constant = matrix.nunique(axis=0, dropna=False) <= 1
    removed = [str(c) for c in matrix.columns[constant.to_numpy()]]
    if removed:
        logger.info(f"剔除 {len(removed)} 个常数特征列")
    return matrix.loc[:, ~constant.to_numpy()], removed
