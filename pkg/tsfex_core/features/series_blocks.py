"""
基于整条序列的特征块
聚类标签（K-Shape / K-Means）、ROCKET 卷积特征、测量窗口统计
"""

import logging

import numpy as np

from tsfex_core.clustering import ClusterModel, assign, kmeans_fit, kshape_fit
from tsfex_core.events import ContactEvent, SensorKind, segment_looks
from tsfex_core.features.base import FeatureBlock, FeatureVector
from tsfex_core.rocket import (
    RocketConfig,
    generate_kernels,
    kernels_from_state,
    kernels_to_state,
    rocket_feature_names,
    rocket_transform,
)
from tsfex_core.series import magnitude, pad_series, resample_series

logger = logging.getLogger(__name__)

PREPROCESS_MODES = ("pad", "resample")


def sensor_signal(event: ContactEvent, kind: SensorKind) -> np.ndarray:
    """单通道化：单轴传感器（BLE）取原值，多轴传感器取逐点幅值；缺失传感器返回空序列"""
    if not event.has(kind):
        return np.zeros(0)
    values = event.series[kind].values
    if values.shape[1] == 1:
        return values[:, 0].copy()
    return magnitude(values)


def fixed_length(values: np.ndarray, mode: str, length: int) -> np.ndarray:
    """
    变长序列转为定长

    pad: 末尾补零，超长部分截断；resample: 线性插值，长度不足 2 时用常数填充
    """
    if mode == "pad":
        if len(values) > length:
            logger.debug(f"序列长度 {len(values)} 超过补零长度 {length}，截断")
            values = values[:length]
        return pad_series(values, length)
    if mode == "resample":
        if len(values) >= 2:
            return resample_series(values, length)
        fill = float(values[0]) if len(values) == 1 else 0.0
        return np.full(length, fill)
    raise ValueError(f"未知预处理方式: {mode}")


class ClusterLabelBlock(FeatureBlock):
    """
    聚类标签特征块

    每个传感器的单通道序列定长化后聚类，簇编号作为整数特征 `cluster_<SENSOR>`
    """

    def __init__(
        self,
        method: str = "kshape",
        k: int = 14,
        sensors=(SensorKind.ACC,),
        preprocess: str = "pad",
        series_length: int = 64,
        k_overrides: dict | None = None,
        metric: str = "euclidean",
        max_iter: int = 100,
        seed: int = 0,
        n_jobs: int = 1,
    ):
        if method not in ("kshape", "kmeans"):
            raise ValueError(f"未知聚类方法: {method}")
        if preprocess not in PREPROCESS_MODES:
            raise ValueError(f"未知预处理方式: {preprocess}")
        self.method = method
        self.k = int(k)
        self.sensors = tuple(SensorKind(s) for s in sensors)
        self.preprocess = preprocess
        self.series_length = int(series_length)
        self.k_overrides = {SensorKind(s): int(v) for s, v in (k_overrides or {}).items()}
        self.metric = metric
        self.max_iter = int(max_iter)
        self.seed = int(seed)
        self.n_jobs = n_jobs
        self._length: int | None = None
        self._models: dict[SensorKind, ClusterModel] = {}

    @property
    def name(self) -> str:
        return "cluster"

    @property
    def description(self) -> str:
        return f"{self.method} 聚类标签（{self.preprocess}）"

    def _matrix(self, events: list[ContactEvent], kind: SensorKind) -> np.ndarray:
        return np.vstack(
            [fixed_length(sensor_signal(e, kind), self.preprocess, self._length) for e in events]
        )

    def fit(self, events: list[ContactEvent]) -> "ClusterLabelBlock":
        if not events:
            raise ValueError("聚类特征块训练集不能为空")
        if self.preprocess == "pad":
            self._length = max(
                1, max(len(sensor_signal(e, kind)) for e in events for kind in self.sensors)
            )
        else:
            self._length = self.series_length

        self._models = {}
        for kind in self.sensors:
            k = self.k_overrides.get(kind, self.k)
            if k > len(events):
                logger.warning(f"{kind.value}: k={k} 大于样本数 {len(events)}，改用 k={len(events)}")
                k = len(events)
            data = self._matrix(events, kind)
            if self.method == "kshape":
                model = kshape_fit(data, k, seed=self.seed, max_iter=self.max_iter)
            else:
                model = kmeans_fit(
                    data,
                    k,
                    seed=self.seed,
                    max_iter=self.max_iter,
                    metric=self.metric,
                    n_jobs=self.n_jobs,
                )
            self._models[kind] = model
        return self

    def extract_many(self, events: list[ContactEvent]) -> list[FeatureVector]:
        if not self._models:
            raise RuntimeError("ClusterLabelBlock 尚未 fit")
        columns = {
            f"cluster_{kind.value}": assign(model, self._matrix(events, kind), self.n_jobs)
            for kind, model in self._models.items()
        }
        return [
            {name: float(labels[i]) for name, labels in columns.items()}
            for i in range(len(events))
        ]

    def extract(self, event: ContactEvent) -> FeatureVector:
        return self.extract_many([event])[0]

    def get_state(self) -> dict:
        return {
            "length": self._length,
            "models": {kind.value: m.get_state() for kind, m in self._models.items()},
        }

    def set_state(self, state: dict) -> None:
        self._length = int(state["length"])
        self._models = {
            SensorKind(kind): ClusterModel.from_state(s) for kind, s in state["models"].items()
        }


class RocketBlock(FeatureBlock):
    """ROCKET 特征块：各传感器幅值序列重采样后做随机卷积变换"""

    def __init__(
        self,
        num_kernels: int = 1000,
        sensors=(SensorKind.ACC, SensorKind.GYR, SensorKind.ATT),
        series_length: int = 64,
        seed: int = 0,
        n_jobs: int = 1,
    ):
        self.config = RocketConfig(num_kernels=int(num_kernels), seed=int(seed))
        self.sensors = tuple(SensorKind(s) for s in sensors)
        self.series_length = int(series_length)
        self.n_jobs = n_jobs
        self._kernels = []

    @property
    def name(self) -> str:
        return "rocket"

    @property
    def description(self) -> str:
        return f"ROCKET 随机卷积特征（{self.config.num_kernels} 核）"

    def fit(self, events: list[ContactEvent]) -> "RocketBlock":
        self._kernels = generate_kernels(self.config, self.series_length)
        return self

    def extract_many(self, events: list[ContactEvent]) -> list[FeatureVector]:
        if not self._kernels:
            raise RuntimeError("RocketBlock 尚未 fit")
        ids = [e.id for e in events]
        vectors: list[FeatureVector] = [{} for _ in events]
        for kind in self.sensors:
            series = [
                fixed_length(sensor_signal(e, kind), "resample", self.series_length)
                for e in events
            ]
            frame = rocket_transform(series, self._kernels, ids=ids, n_jobs=self.n_jobs)
            frame.columns = rocket_feature_names(len(self._kernels), prefix=f"rocket_{kind.value}_")
            for vec, row in zip(vectors, frame.to_numpy()):
                vec.update(zip(frame.columns, row.tolist()))
        return vectors

    def extract(self, event: ContactEvent) -> FeatureVector:
        return self.extract_many([event])[0]

    def get_state(self) -> dict:
        return {"kernels": kernels_to_state(self._kernels)} if self._kernels else {}

    def set_state(self, state: dict) -> None:
        self._kernels = kernels_from_state(state["kernels"])


class LookStatsBlock(FeatureBlock):
    """测量窗口统计：窗口数、平均时长、每窗口 BLE 采样数"""

    def __init__(self, gap_s: float = 10.0):
        self.gap_s = float(gap_s)

    @property
    def name(self) -> str:
        return "looks"

    @property
    def description(self) -> str:
        return f"按 {self.gap_s:g} 秒间隔切分的测量窗口统计"

    def extract(self, event: ContactEvent) -> FeatureVector:
        looks = segment_looks(event, self.gap_s)
        if not looks:
            return {"n_looks": 0.0, "mean_look_duration_s": 0.0, "ble_samples_per_look": 0.0}
        ble_ranges = [lk.index_ranges.get(SensorKind.BLE, (0, 0)) for lk in looks]
        ble = [stop - start for start, stop in ble_ranges]
        return {
            "n_looks": float(len(looks)),
            "mean_look_duration_s": float(np.mean([lk.duration_s for lk in looks])),
            "ble_samples_per_look": float(np.mean(ble)),
        }
