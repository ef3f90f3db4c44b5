"""
tsfex: 基于 BLE 与 IMU 时间序列特征的接触距离分类
"""

__version__ = "0.1.0"

from tsfex_core.evaluation import EvalProtocol, EvalReport, evaluate
from tsfex_core.events import ContactEvent, Grain, SensorKind, load_event, parse_event_file
from tsfex_core.exceptions import DataError, TsfexError
from tsfex_core.pipeline import FeaturePipeline, ProximitySystem

__all__ = [
    "ContactEvent",
    "DataError",
    "EvalProtocol",
    "EvalReport",
    "FeaturePipeline",
    "Grain",
    "ProximitySystem",
    "SensorKind",
    "TsfexError",
    "evaluate",
    "load_event",
    "parse_event_file",
]
