"""
测试公共工具
"""

from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from tsfex_core.config import parse_config
from tsfex_core.events import ContactEvent, EventMetadata, Grain, SensorKind, SensorSeries
from tsfex_core.synthetic import generate_event


def build_event(
    event_id: str = "ev000000",
    grain: Grain = Grain.FINE,
    rssi=(-60.0, -62.0, -61.0, -63.0),
    imu: dict | None = None,
    ble_times=None,
    **codes,
) -> ContactEvent:
    """构造接触事件；imu 为 {SensorKind: (n, arity) 数组}，时间戳取 0.1 秒间隔"""
    rssi = np.asarray(rssi, dtype=np.float64)
    ble_times = np.arange(len(rssi)) * 0.5 if ble_times is None else np.asarray(ble_times)
    series = {SensorKind.BLE: SensorSeries(SensorKind.BLE, ble_times, rssi)}
    for kind, values in (imu or {}).items():
        values = np.asarray(values, dtype=np.float64)
        series[kind] = SensorSeries(kind, np.arange(len(values)) * 0.1, values)
    return ContactEvent(event_id, EventMetadata(grain=grain, **codes), series)


@pytest.fixture
def make_event():
    return build_event


@pytest.fixture
def rng():
    return np.random.default_rng(0)


STRATA = [
    (Grain.FINE, 1.2),
    (Grain.FINE, 1.8),
    (Grain.FINE, 3.0),
    (Grain.FINE, 4.5),
    (Grain.COARSE, 1.8),
    (Grain.COARSE, 4.5),
]

SMALL_CONFIG = """
[learner.fine]
n_trees = 8
max_depth = 2

[learner.coarse]
n_trees = 8
max_depth = 2

[rocket]
num_kernels = 20
series_length = 32

[cluster]
k = 3
series_length = 32
max_iter = 20

[tuner]
budget = 3
n_init = 2
n_candidates = 64

[synthetic]
n_events = 36
max_looks = 2
"""


@pytest.fixture
def small_config_text():
    return SMALL_CONFIG


@pytest.fixture
def small_config():
    """小规模配置：少量树与卷积核"""
    return parse_config(SMALL_CONFIG)


@pytest.fixture
def synthetic_corpus(small_config):
    """
    内存中的合成语料：(按 ID 排序的事件, event_id -> 距离)

    粒度与距离按 STRATA 轮换，每个 (粒度, 距离) 组合的事件数相同
    """
    spec = small_config.synthetic
    seeds = np.random.SeedSequence(spec.seed).spawn(spec.n_events)
    events = []
    for i, seed in enumerate(seeds):
        grain, distance = STRATA[i % len(STRATA)]
        if grain is Grain.FINE:
            variant = replace(spec, fine_fraction=1.0, fine_distances=(distance,))
        else:
            variant = replace(spec, fine_fraction=0.0, coarse_distances=(distance,))
        events.append(generate_event(variant, i, seed))
    labels = pd.Series({e.id: e.metadata.true_distance_m for e in events}, dtype=np.float64)
    return events, labels
