"""
逐轴统计特征
RSSI 与每个 IMU 传感器的每个坐标轴各视为一条独立序列
"""

import logging

from tsfex_core.events import ContactEvent, SensorKind
from tsfex_core.features.base import FeatureBlock, FeatureVector
from tsfex_core.features.statistics import stat_features

logger = logging.getLogger(__name__)

DEFAULT_SENSORS = (SensorKind.BLE, SensorKind.ACC, SensorKind.GYR, SensorKind.ATT)

# count_above_s 的默认阈值
DEFAULT_THRESHOLDS = {
    SensorKind.BLE: -65.0,
    SensorKind.ACC: 0.0,
    SensorKind.GYR: 0.0,
    SensorKind.ATT: 0.0,
}


def per_axis_features(
    event: ContactEvent,
    sensors=DEFAULT_SENSORS,
    thresholds: dict[SensorKind, float] | None = None,
) -> FeatureVector:
    """
    对指定传感器的每个轴计算统计特征

    特征名为 `SENSOR_axis_feature`，如 `GYR_y_energy`、`BLE_rssi_kurtosis_g2`；
    缺失的传感器不产生特征

    Args:
        event: 接触事件
        sensors: 传感器列表
        thresholds: 各传感器 count_above_s 阈值

    Returns:
        特征字典
    """
    thresholds = {**DEFAULT_THRESHOLDS, **(thresholds or {})}
    features: FeatureVector = {}
    for kind in sensors:
        kind = SensorKind(kind)
        if not event.has(kind):
            continue
        s = thresholds.get(kind, 0.0)
        series = event.series[kind]
        for index, axis in enumerate(kind.axes):
            stats = stat_features(series.channel(index), s=s)
            features.update({f"{kind.value}_{axis}_{k}": v for k, v in stats.items()})
    return features


class PerAxisStatsBlock(FeatureBlock):
    """逐轴统计特征块（细粒度配方）"""

    def __init__(self, sensors=DEFAULT_SENSORS, thresholds: dict | None = None):
        self._sensors = tuple(SensorKind(s) for s in sensors)
        self._thresholds = {SensorKind(k): float(v) for k, v in (thresholds or {}).items()}

    @property
    def name(self) -> str:
        return "per_axis"

    @property
    def description(self) -> str:
        return "RSSI 与 IMU 各轴的能量、峰度、傅里叶熵、CWT 峰值等统计特征"

    def extract(self, event: ContactEvent) -> FeatureVector:
        return per_axis_features(event, self._sensors, self._thresholds)
