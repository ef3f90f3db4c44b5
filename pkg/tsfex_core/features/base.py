"""
特征块模块
每个特征块从接触事件中提取一组命名特征；有状态的块先在训练事件上 fit
"""

from abc import ABC, abstractmethod

import numpy as np
import pandas as pd

from tsfex_core.events import ContactEvent

FeatureVector = dict[str, float]


class FeatureBlock(ABC):
    """特征块基类"""

    @property
    @abstractmethod
    def name(self) -> str:
        """块名称（配方中使用）"""
        pass

    @property
    @abstractmethod
    def description(self) -> str:
        """块描述"""
        pass

    def fit(self, events: list[ContactEvent]) -> "FeatureBlock":
        """在训练事件上学习状态（默认无状态）"""
        return self

    @abstractmethod
    def extract(self, event: ContactEvent) -> FeatureVector:
        """
        提取单个事件的特征

        Args:
            event: 接触事件

        Returns:
            有序特征字典
        """
        pass

    def extract_many(self, events: list[ContactEvent]) -> list[FeatureVector]:
        """批量提取；需要整体计算的块可覆盖"""
        return [self.extract(e) for e in events]

    def get_state(self) -> dict:
        """导出已学习状态（写入模型包）"""
        return {}

    def set_state(self, state: dict) -> None:
        """从模型包恢复状态"""
        pass


def vectors_to_frame(ids: list[str], vectors: list[FeatureVector]) -> pd.DataFrame:
    """
    将特征字典列表拼成矩阵

    列顺序为各特征首次出现的顺序；事件缺少的特征填 0
    """
    columns: dict[str, None] = {}
    for vec in vectors:
        for key in vec:
            columns.setdefault(key, None)
    frame = pd.DataFrame.from_records(vectors, index=pd.Index(ids, name="event_id"))
    frame = frame.reindex(columns=list(columns)).fillna(0.0).astype(np.float64)
    return frame


# 特征块工厂
class FeatureBlockFactory:
    """特征块工厂"""

    _blocks: dict[str, type[FeatureBlock]] = {}

    @classmethod
    def _init_blocks(cls):
        """延迟注册内置特征块"""
        if cls._blocks:
            return
        from tsfex_core.features.baseline import BaselineBlock
        from tsfex_core.features.coarse_imu import CoarseImuBlock
        from tsfex_core.features.per_axis import PerAxisStatsBlock
        from tsfex_core.features.series_blocks import (
            ClusterLabelBlock,
            LookStatsBlock,
            RocketBlock,
        )

        cls._blocks.update(
            {
                "baseline": BaselineBlock,
                "per_axis": PerAxisStatsBlock,
                "coarse_imu": CoarseImuBlock,
                "cluster": ClusterLabelBlock,
                "rocket": RocketBlock,
                "looks": LookStatsBlock,
            }
        )

    @classmethod
    def create(cls, block_name: str, **kwargs) -> FeatureBlock:
        """创建特征块实例"""
        cls._init_blocks()
        block_class = cls._blocks.get(block_name.lower())
        if block_class is None:
            raise ValueError(f"未知特征块: {block_name}")
        return block_class(**kwargs)

    @classmethod
    def list_blocks(cls) -> list[str]:
        """列出所有可用特征块"""
        cls._init_blocks()
        return list(cls._blocks.keys())
