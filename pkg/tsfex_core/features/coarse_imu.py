"""
粗粒度 IMU 工程特征
加速度幅值、高度幅值、陀螺仪各轴归一化均值
"""

import logging

import numpy as np
import pandas as pd

from tsfex_core.events import ContactEvent, SensorKind
from tsfex_core.features.base import FeatureBlock, FeatureVector
from tsfex_core.features.normalizer import NormStats, fit_normalizer
from tsfex_core.series import magnitude

logger = logging.getLogger(__name__)

COARSE_FEATURE_NAMES = (
    "magnitude_acc",
    "magnitude_alt",
    "gyr_x_norm",
    "gyr_y_norm",
    "gyr_z_norm",
)

_GYR_RAW = ("gyr_x_mean", "gyr_y_mean", "gyr_z_mean")


def _raw_imu(event: ContactEvent) -> tuple[dict[str, float], list[str]]:
    """逐采样幅值的均值与陀螺仪各轴均值；缺失传感器记 0 并返回缺失列表"""
    missing = []
    raw = {}
    for kind, key in ((SensorKind.ACC, "magnitude_acc"), (SensorKind.ALT, "magnitude_alt")):
        if event.has(kind):
            raw[key] = float(magnitude(event.series[kind].values).mean())
        else:
            raw[key] = 0.0
            missing.append(kind.value)
    if event.has(SensorKind.GYR):
        means = event.series[SensorKind.GYR].values.mean(axis=0)
        raw.update({name: float(v) for name, v in zip(_GYR_RAW, means)})
    else:
        raw.update({name: 0.0 for name in _GYR_RAW})
        missing.append(SensorKind.GYR.value)
    return raw, missing


def coarse_engineered(event: ContactEvent, stats: NormStats) -> FeatureVector:
    """
    计算粗粒度工程特征

    Args:
        event: 接触事件
        stats: 陀螺仪各轴均值的训练范围（gyr_x_mean / gyr_y_mean / gyr_z_mean）

    Returns:
        magnitude_acc, magnitude_alt, gyr_x_norm, gyr_y_norm, gyr_z_norm
    """
    raw, missing = _raw_imu(event)
    if missing:
        logger.warning(f"事件 {event.id} 缺少传感器 {missing}，对应特征记为 0")
    features = {"magnitude_acc": raw["magnitude_acc"], "magnitude_alt": raw["magnitude_alt"]}
    for raw_name, out_name in zip(_GYR_RAW, COARSE_FEATURE_NAMES[2:]):
        features[out_name] = stats.normalize(raw_name, raw[raw_name])
    return features


class CoarseImuBlock(FeatureBlock):
    """粗粒度 IMU 工程特征块"""

    def __init__(self):
        self._stats: NormStats | None = None

    @property
    def name(self) -> str:
        return "coarse_imu"

    @property
    def description(self) -> str:
        return "ACC/ALT 幅值均值与 GYR 各轴归一化均值"

    def fit(self, events: list[ContactEvent]) -> "CoarseImuBlock":
        raw = pd.DataFrame([_raw_imu(e)[0] for e in events])
        self._stats = fit_normalizer(raw[list(_GYR_RAW)])
        return self

    def extract(self, event: ContactEvent) -> FeatureVector:
        if self._stats is None:
            raise RuntimeError("CoarseImuBlock 尚未 fit")
        return coarse_engineered(event, self._stats)

    def get_state(self) -> dict:
        return {} if self._stats is None else {"stats": self._stats.get_state()}

    def set_state(self, state: dict) -> None:
        self._stats = NormStats.from_state(state["stats"])
