"""
接触事件模块
解析事件文件为带类型的传感器序列，并按时间间隔切分测量窗口（look）

事件文件格式（UTF-8 文本）:
    #TXPower=8
    #TXCarry=1
    #Grain=fine
    0.000,BLE,-60.5
    0.100,ACC,0.01,0.02,9.81
每个记录行为 `t,SENSOR,v1[,v2[,v3]]`，BLE 1 个值，ALT 2 个值，其余 3 个值
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np
import pandas as pd

from tsfex_core.exceptions import EventParseError, LabelError

logger = logging.getLogger(__name__)


class SensorKind(str, Enum):
    """传感器类型"""

    BLE = "BLE"
    ACC = "ACC"
    GYR = "GYR"
    ATT = "ATT"
    ALT = "ALT"
    GRA = "GRA"
    MAG = "MAG"

    @property
    def arity(self) -> int:
        """每个采样点的通道数"""
        return CHANNEL_ARITY[self]

    @property
    def axes(self) -> tuple[str, ...]:
        """通道名（用于特征命名）"""
        if self is SensorKind.BLE:
            return ("rssi",)
        return ("x", "y", "z")[: self.arity]


CHANNEL_ARITY = {
    SensorKind.BLE: 1,
    SensorKind.ALT: 2,
    SensorKind.ACC: 3,
    SensorKind.GYR: 3,
    SensorKind.ATT: 3,
    SensorKind.GRA: 3,
    SensorKind.MAG: 3,
}


class Grain(str, Enum):
    """评估子集：细粒度 / 粗粒度"""

    FINE = "fine"
    COARSE = "coarse"

    @property
    def flag(self) -> int:
        """序列化编码：0=fine, 1=coarse"""
        return 0 if self is Grain.FINE else 1


# TXPower 原始值(dBm) -> 编码；0 同时表示未知
TX_POWER_CODES = {7: 0, 8: 1, 12: 2}
TX_POWER_DBM = {0: 7.0, 1: 8.0, 2: 12.0}

# 其余分类头字段允许的名称写法
_NAMED_CODES = {
    "TXCarry": {"unknown": 0, "hand": 1, "pocket": 2},
    "RXCarry": {"unknown": 0, "hand": 1, "pocket": 2},
    "TXPose": {"unknown": 0, "sitting": 1, "standing": 2},
    "RXPose": {"unknown": 0, "sitting": 1, "standing": 2},
    "TXDevice": {"unknown": 0},
    "RXDevice": {"unknown": 0},
}

HEADER_FIELDS = {
    "TXPower": "tx_power_code",
    "TXCarry": "tx_carry",
    "RXCarry": "rx_carry",
    "TXPose": "tx_pose",
    "RXPose": "rx_pose",
    "TXDevice": "tx_device",
    "RXDevice": "rx_device",
}


@dataclass(frozen=True)
class SensorSeries:
    """单个传感器的时间序列"""

    kind: SensorKind
    timestamps: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.float64).reshape(-1)
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1)
        if len(ts) != len(vals):
            raise ValueError(f"{self.kind.value}: 时间戳数量 {len(ts)} 与采样数量 {len(vals)} 不一致")
        if vals.shape[1] != self.kind.arity:
            raise ValueError(
                f"{self.kind.value}: 通道数应为 {self.kind.arity}，实际为 {vals.shape[1]}"
            )
        if len(ts) > 1 and np.any(np.diff(ts) <= 0):
            raise ValueError(f"{self.kind.value}: 时间戳必须严格递增")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.timestamps)

    def channel(self, index: int) -> np.ndarray:
        """取单个通道的一维序列"""
        return self.values[:, index]


@dataclass(frozen=True)
class EventMetadata:
    """事件元数据（分类编码）"""

    tx_power_code: int = 0
    tx_carry: int = 0
    rx_carry: int = 0
    tx_pose: int = 0
    rx_pose: int = 0
    tx_device: int = 0
    rx_device: int = 0
    grain: Grain = Grain.FINE
    true_distance_m: float | None = None

    def __post_init__(self):
        for name in HEADER_FIELDS.values():
            code = getattr(self, name)
            if code not in (0, 1, 2):
                raise ValueError(f"{name} 编码必须在 {{0,1,2}} 内，实际为 {code}")
        if self.true_distance_m is not None and not self.true_distance_m > 0:
            raise ValueError(f"真实距离必须为正数: {self.true_distance_m}")

    @property
    def tx_power_dbm(self) -> float:
        return TX_POWER_DBM[self.tx_power_code]

    def codes(self) -> dict[str, int]:
        """按固定顺序返回分类编码"""
        return {name: int(getattr(self, name)) for name in HEADER_FIELDS.values()}


@dataclass(frozen=True)
class ContactEvent:
    """接触事件：一个事件文件"""

    id: str
    metadata: EventMetadata
    series: dict[SensorKind, SensorSeries] = field(default_factory=dict)

    @property
    def ble(self) -> SensorSeries:
        """BLE RSSI 序列（必需）"""
        return self.series[SensorKind.BLE]

    @property
    def grain(self) -> Grain:
        return self.metadata.grain

    def has(self, kind: SensorKind) -> bool:
        return kind in self.series and len(self.series[kind]) > 0

    def with_distance(self, distance_m: float) -> "ContactEvent":
        """附加真实距离（仅训练时使用）"""
        meta = replace(self.metadata, true_distance_m=float(distance_m))
        return ContactEvent(self.id, meta, self.series)


@dataclass(frozen=True)
class Look:
    """一次连续测量窗口"""

    start_s: float
    end_s: float
    index_ranges: dict[SensorKind, tuple[int, int]]

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    @property
    def n_samples(self) -> int:
        return sum(stop - start for start, stop in self.index_ranges.values())


def _parse_header_value(key: str, raw: str, line_no: int) -> int | Grain:
    """解析头字段取值为编码"""
    value = raw.strip()
    if key == "Grain":
        lowered = value.lower()
        if lowered in ("fine", "0"):
            return Grain.FINE
        if lowered in ("coarse", "1"):
            return Grain.COARSE
        raise EventParseError(f"无法识别的 Grain 取值: {value}", line_no)

    if key == "TXPower":
        if value.lower() == "unknown":
            return 0
        try:
            dbm = float(value)
        except ValueError:
            raise EventParseError(f"TXPower 取值无效: {value}", line_no) from None
        if dbm.is_integer() and int(dbm) in TX_POWER_CODES:
            return TX_POWER_CODES[int(dbm)]
        raise EventParseError(f"TXPower 必须为 7/8/12: {value}", line_no)

    named = _NAMED_CODES[key]
    if value.lower() in named:
        return named[value.lower()]
    try:
        code = int(value)
    except ValueError:
        raise EventParseError(f"{key} 取值无效: {value}", line_no) from None
    if code not in (0, 1, 2):
        raise EventParseError(f"{key} 编码必须在 {{0,1,2}} 内: {value}", line_no)
    return code


def parse_event_file(text: str | bytes, event_id: str = "") -> ContactEvent:
    """
    解析事件文件内容

    Args:
        text: 文件内容（bytes 按 UTF-8 解码）
        event_id: 事件 ID（通常为文件名）

    Returns:
        ContactEvent

    Raises:
        EventParseError: 格式错误、时间戳非递增、通道数错误或缺少 BLE 记录
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise EventParseError(f"文件不是合法的 UTF-8: {e}") from None

    meta_kwargs: dict = {}
    times: dict[SensorKind, list[float]] = {}
    samples: dict[SensorKind, list[list[float]]] = {}

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line:
            continue

        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            key = key.strip()
            if not sep:
                raise EventParseError(f"头部行缺少 '=': {line}", line_no)
            if key == "Grain":
                meta_kwargs["grain"] = _parse_header_value(key, value, line_no)
            elif key in HEADER_FIELDS:
                meta_kwargs[HEADER_FIELDS[key]] = _parse_header_value(key, value, line_no)
            else:
                logger.debug(f"忽略未知头字段 {key} (第 {line_no} 行)")
            continue

        parts = [p.strip() for p in line.split(",")]
        if len(parts) < 3:
            raise EventParseError(f"记录字段不足: {line}", line_no)
        try:
            kind = SensorKind(parts[1])
        except ValueError:
            raise EventParseError(f"未知传感器类型: {parts[1]}", line_no) from None
        try:
            t = float(parts[0])
            vals = [float(v) for v in parts[2:]]
        except ValueError:
            raise EventParseError(f"数值无法解析: {line}", line_no) from None
        if not np.isfinite(t) or not all(np.isfinite(vals)):
            raise EventParseError(f"存在非有限数值: {line}", line_no)
        if len(vals) != kind.arity:
            raise EventParseError(
                f"{kind.value} 需要 {kind.arity} 个值，实际为 {len(vals)} 个", line_no
            )

        sensor_times = times.setdefault(kind, [])
        if sensor_times and t <= sensor_times[-1]:
            raise EventParseError(
                f"{kind.value} 时间戳非递增: {t} <= {sensor_times[-1]}", line_no
            )
        sensor_times.append(t)
        samples.setdefault(kind, []).append(vals)

    if not times.get(SensorKind.BLE):
        raise EventParseError("缺少 BLE 记录")

    series = {
        kind: SensorSeries(kind, np.array(times[kind]), np.array(samples[kind]))
        for kind in SensorKind
        if kind in times
    }
    return ContactEvent(event_id, EventMetadata(**meta_kwargs), series)


def load_event(path: str | Path) -> ContactEvent:
    """读取并解析单个事件文件，ID 取文件名（不含扩展名）"""
    path = Path(path)
    return parse_event_file(path.read_bytes(), event_id=path.stem)


def format_event_file(event: ContactEvent) -> str:
    """
    将事件序列化为规范的事件文件文本

    记录按时间排序，同一时刻按传感器枚举顺序；时间保留 3 位小数，取值保留 4 位小数
    """
    meta = event.metadata
    lines = [f"#TXPower={int(meta.tx_power_dbm)}"]
    for key, attr in HEADER_FIELDS.items():
        if key != "TXPower":
            lines.append(f"#{key}={getattr(meta, attr)}")
    lines.append(f"#Grain={meta.grain.value}")

    records = []
    for order, kind in enumerate(SensorKind):
        if kind not in event.series:
            continue
        s = event.series[kind]
        for t, row in zip(s.timestamps, s.values):
            values = ",".join(f"{v:.4f}" for v in row)
            records.append((round(float(t), 3), order, f"{t:.3f},{kind.value},{values}"))
    records.sort(key=lambda r: (r[0], r[1]))
    lines.extend(r[2] for r in records)
    return "\n".join(lines) + "\n"


def segment_looks(event: ContactEvent, gap_s: float = 10.0) -> list[Look]:
    """
    按时间间隔切分测量窗口

    所有传感器时间戳的并集中，相邻间隔 >= gap_s 处切开

    Args:
        event: 接触事件
        gap_s: 切分间隔（秒）

    Returns:
        按时间排序、互不重叠的 Look 列表；无采样时返回空列表
    """
    if gap_s <= 0:
        raise ValueError(f"gap_s 必须为正数: {gap_s}")

    non_empty = {k: s for k, s in event.series.items() if len(s) > 0}
    if not non_empty:
        return []

    union = np.unique(np.concatenate([s.timestamps for s in non_empty.values()]))
    breaks = np.nonzero(np.diff(union) >= gap_s)[0]
    starts = np.concatenate([[union[0]], union[breaks + 1]])
    ends = np.concatenate([union[breaks], [union[-1]]])

    looks = []
    for start, end in zip(starts, ends):
        ranges = {
            kind: (
                int(np.searchsorted(s.timestamps, start, side="left")),
                int(np.searchsorted(s.timestamps, end, side="right")),
            )
            for kind, s in non_empty.items()
        }
        looks.append(Look(float(start), float(end), ranges))
    return looks


def read_key_file(path: str | Path) -> pd.DataFrame:
    """
    读取标签文件 `event_id,grain,distance_m`

    Returns:
        以 event_id 为索引的 DataFrame，列 grain(fine/coarse), distance_m
    """
    key = pd.read_csv(path, dtype={"event_id": str})
    expected = {"event_id", "grain", "distance_m"}
    if not expected.issubset(key.columns):
        raise LabelError(f"标签文件缺少列: {sorted(expected - set(key.columns))}")
    key["grain"] = key["grain"].astype(str).str.lower()
    bad_grain = ~key["grain"].isin([g.value for g in Grain])
    if bad_grain.any():
        raise LabelError(f"无法识别的 grain: {key.loc[bad_grain, 'grain'].unique().tolist()}")
    if (key["distance_m"] <= 0).any() or key["distance_m"].isna().any():
        raise LabelError("distance_m 必须为正数")
    if key["event_id"].duplicated().any():
        raise LabelError("标签文件中存在重复的 event_id")
    return key.set_index("event_id").sort_index()


def write_key_file(key: pd.DataFrame, path: str | Path) -> None:
    """写出标签文件"""
    key.reset_index()[["event_id", "grain", "distance_m"]].to_csv(path, index=False)
