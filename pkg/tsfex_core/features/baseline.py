"""
基线特征
路径损耗距离估计 + 归一化平均 RSSI / 路径衰减 + 元数据编码
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from tsfex_core.events import TX_POWER_DBM, ContactEvent, Grain
from tsfex_core.features.base import FeatureBlock, FeatureVector
from tsfex_core.features.normalizer import NormStats, apply_normalizer, fit_normalizer

logger = logging.getLogger(__name__)

# 路径衰减 = 发射功率 - 41 - 平均 RSSI
ATTENUATION_OFFSET_DB = 41.0


@dataclass(frozen=True)
class PathLossParams:
    """对数距离路径损耗参数"""

    tx_ref_dbm: float
    exponent_n: float

    def __post_init__(self):
        if not self.exponent_n > 0:
            raise ValueError(f"路径损耗指数必须为正数: {self.exponent_n}")

    def rssi_at(self, distance_m: float) -> float:
        """正向模型：距离 -> 期望 RSSI"""
        return self.tx_ref_dbm - 10.0 * self.exponent_n * np.log10(distance_m)


# 按粒度标定的路径损耗参数
PATH_LOSS = {
    Grain.COARSE: PathLossParams(tx_ref_dbm=-52.0, exponent_n=2.6),
    Grain.FINE: PathLossParams(tx_ref_dbm=-54.0, exponent_n=2.1),
}

BASELINE_FEATURE_NAMES = (
    "predicted_distance",
    "normalized_mean_rssi",
    "normalized_path_loss_attenuation",
    "grain_flag",
    "tx_power_code",
    "tx_carry",
    "rx_carry",
    "tx_pose",
    "rx_pose",
    "tx_device",
    "rx_device",
)


def path_loss_distance(params: PathLossParams, mean_rssi: float) -> float:
    """d = 10^((TX - RSSI) / (10 N))"""
    return float(10.0 ** ((params.tx_ref_dbm - mean_rssi) / (10.0 * params.exponent_n)))


def _raw_rssi_stats(event: ContactEvent, tx_power_dbm_map: dict[int, float]) -> dict[str, float]:
    rssi = event.ble.channel(0)
    if len(rssi) == 0:
        raise ValueError(f"事件 {event.id} 的 BLE 序列为空")
    mean_rssi = float(rssi.mean())
    tx_dbm = tx_power_dbm_map[event.metadata.tx_power_code]
    return {
        "mean_rssi": mean_rssi,
        "path_loss_attenuation": tx_dbm - ATTENUATION_OFFSET_DB - mean_rssi,
    }


def baseline_features(
    event: ContactEvent,
    stats: NormStats,
    tx_power_dbm_map: dict[int, float] | None = None,
) -> FeatureVector:
    """
    计算基线特征

    Args:
        event: 接触事件（BLE 非空）
        stats: 在训练集上拟合的 mean_rssi / path_loss_attenuation 范围
        tx_power_dbm_map: TXPower 编码 -> dBm

    Returns:
        按 BASELINE_FEATURE_NAMES 顺序的特征字典
    """
    tx_map = tx_power_dbm_map or TX_POWER_DBM
    raw = _raw_rssi_stats(event, tx_map)
    normalized = apply_normalizer(stats, raw)
    meta = event.metadata
    features = {
        "predicted_distance": path_loss_distance(PATH_LOSS[meta.grain], raw["mean_rssi"]),
        "normalized_mean_rssi": normalized["mean_rssi"],
        "normalized_path_loss_attenuation": normalized["path_loss_attenuation"],
        "grain_flag": float(meta.grain.flag),
    }
    features.update({name: float(code) for name, code in meta.codes().items()})
    return features


class BaselineBlock(FeatureBlock):
    """基线特征块"""

    def __init__(self, tx_power_dbm_map: dict[int, float] | None = None):
        self._tx_map = dict(tx_power_dbm_map or TX_POWER_DBM)
        self._stats: NormStats | None = None

    @property
    def name(self) -> str:
        return "baseline"

    @property
    def description(self) -> str:
        return "路径损耗距离估计、归一化平均 RSSI 与路径衰减、设备与姿态编码"

    def fit(self, events: list[ContactEvent]) -> "BaselineBlock":
        raw = pd.DataFrame([_raw_rssi_stats(e, self._tx_map) for e in events])
        self._stats = fit_normalizer(raw)
        logger.info(f"基线特征归一化范围: {self._stats.ranges}")
        return self

    def extract(self, event: ContactEvent) -> FeatureVector:
        if self._stats is None:
            raise RuntimeError("BaselineBlock 尚未 fit")
        return baseline_features(event, self._stats, self._tx_map)

    def get_state(self) -> dict:
        if self._stats is None:
            return {}
        return {"stats": self._stats.get_state()}

    def set_state(self, state: dict) -> None:
        self._stats = NormStats.from_state(state["stats"])
