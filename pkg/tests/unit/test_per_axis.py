"""
单元测试 - 逐轴统计特征
"""

import pytest

from tsfex_core.events import SensorKind
from tsfex_core.features.per_axis import PerAxisStatsBlock, per_axis_features
from tsfex_core.features.statistics import STAT_FEATURE_NAMES, stat_features


class TestPerAxisFeatures:
    """逐轴特征测试"""

    def test_ble_only(self, make_event):
        features = per_axis_features(make_event())
        assert len(features) == len(STAT_FEATURE_NAMES)
        assert all(name.startswith("BLE_rssi_") for name in features)

    def test_acc_adds_thirty(self, make_event, rng):
        event = make_event(imu={SensorKind.ACC: rng.normal(size=(12, 3))})
        features = per_axis_features(event)
        assert sum(1 for n in features if n.startswith("ACC_")) == 30

    def test_naming(self, make_event, rng):
        event = make_event(imu={SensorKind.GYR: rng.normal(size=(8, 3))})
        features = per_axis_features(event)
        expected = stat_features(event.series[SensorKind.GYR].channel(1))["energy"]
        assert features["GYR_y_energy"] == expected

    def test_thresholds_per_sensor(self, make_event):
        """测试 count_above_s 按传感器取阈值（BLE 默认 -65）"""
        event = make_event(rssi=[-70.0, -60.0, -50.0, -64.0])
        assert per_axis_features(event)["BLE_rssi_count_above_s"] == pytest.approx(0.75)
        custom = per_axis_features(event, thresholds={SensorKind.BLE: -55.0})
        assert custom["BLE_rssi_count_above_s"] == pytest.approx(0.25)

    def test_unrequested_sensor_ignored(self, make_event, rng):
        event = make_event(imu={SensorKind.MAG: rng.normal(size=(8, 3))})
        assert not any(n.startswith("MAG_") for n in per_axis_features(event))


class TestPerAxisStatsBlock:
    def test_block_accepts_sensor_names(self, make_event, rng):
        block = PerAxisStatsBlock(sensors=["BLE", "ATT"], thresholds={"BLE": -65.0})
        event = make_event(imu={SensorKind.ATT: rng.normal(size=(6, 3))})
        features = block.extract(event)
        assert "ATT_z_kurtosis_g2" in features
        assert block.name == "per_axis"
