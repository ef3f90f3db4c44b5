"""
TC4TL 判定与评分
漏检率 P_miss、虚警率 P_false、归一化检测代价 nDCF，以及按 (子集, 阈值) 的四列报告
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from tsfex_core.events import Grain

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["subset", "D", "n_tc4tl", "n_not", "p_miss", "p_false", "ndcf"]


@dataclass(frozen=True)
class TrialRecord:
    """单个事件的真实距离与预测距离"""

    event_id: str
    grain: Grain
    true_distance_m: float
    predicted_distance_m: float

    def __post_init__(self):
        if not (self.true_distance_m > 0 and self.predicted_distance_m > 0):
            raise ValueError(
                f"事件 {self.event_id}: 距离必须为正数 "
                f"(true={self.true_distance_m}, predicted={self.predicted_distance_m})"
            )


@dataclass(frozen=True)
class EvalProtocol:
    fine_thresholds: tuple[float, ...] = (1.2, 1.8, 3.0)
    coarse_thresholds: tuple[float, ...] = (1.8,)
    w_miss: float = 1.0
    w_false: float = 1.0

    def __post_init__(self):
        if not (self.w_miss > 0 and self.w_false > 0):
            raise ValueError(f"权重必须为正数: w_miss={self.w_miss}, w_false={self.w_false}")
        if any(d <= 0 for d in self.fine_thresholds + self.coarse_thresholds):
            raise ValueError("距离阈值必须为正数")

    def columns(self) -> list[tuple[Grain, float]]:
        """报告列：fine × 细粒度阈值，coarse × 粗粒度阈值"""
        return [(Grain.FINE, d) for d in self.fine_thresholds] + [
            (Grain.COARSE, d) for d in self.coarse_thresholds
        ]


@dataclass(frozen=True)
class Confusion:
    n_tc4tl: int
    n_not: int
    misses: int
    false_alarms: int

    @property
    def miss_undefined(self) -> bool:
        return self.n_tc4tl == 0

    @property
    def false_undefined(self) -> bool:
        return self.n_not == 0

    @property
    def p_miss(self) -> float:
        return 0.0 if self.miss_undefined else self.misses / self.n_tc4tl

    @property
    def p_false(self) -> float:
        return 0.0 if self.false_undefined else self.false_alarms / self.n_not


@dataclass(frozen=True)
class ColumnResult:
    grain: Grain
    threshold: float
    confusion: Confusion | None
    ndcf: float | None

    @property
    def present(self) -> bool:
        return self.confusion is not None

    @property
    def label(self) -> str:
        return f"nDCF (D={self.threshold:g}|Set={self.grain.value.capitalize()})"


@dataclass
class EvalReport:
    columns: list[ColumnResult] = field(default_factory=list)
    mean_ndcf: float = 0.0

    @property
    def flags(self) -> list[str]:
        """分母为 0 的比率与缺失子集的说明"""
        notes = []
        for col in self.columns:
            if not col.present:
                notes.append(f"{col.label}: 子集缺失")
                continue
            if col.confusion.miss_undefined:
                notes.append(f"{col.label}: 无 TC4TL 样本，P_miss 记为 0")
            if col.confusion.false_undefined:
                notes.append(f"{col.label}: 无非 TC4TL 样本，P_false 记为 0")
        return notes

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for col in self.columns:
            c = col.confusion
            rows.append(
                {
                    "subset": col.grain.value,
                    "D": col.threshold,
                    "n_tc4tl": c.n_tc4tl if c else np.nan,
                    "n_not": c.n_not if c else np.nan,
                    "p_miss": c.p_miss if c else np.nan,
                    "p_false": c.p_false if c else np.nan,
                    "ndcf": col.ndcf if c else np.nan,
                }
            )
        rows.append({"subset": "mean", "ndcf": self.mean_ndcf})
        return pd.DataFrame(rows, columns=REPORT_COLUMNS)

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False, float_format="%.6f")

    def to_text(self) -> str:
        """对齐文本表格，每列一行，末行为均值"""
        header = f"{'column':<26}{'n_tc4tl':>9}{'n_not':>8}{'P_miss':>9}{'P_false':>9}{'nDCF':>8}"
        lines = [header, "-" * len(header)]
        for col in self.columns:
            if not col.present:
                lines.append(f"{col.label:<26}{'-':>9}{'-':>8}{'-':>9}{'-':>9}{'-':>8}")
                continue
            c = col.confusion
            lines.append(
                f"{col.label:<26}{c.n_tc4tl:>9d}{c.n_not:>8d}"
                f"{c.p_miss:>9.4f}{c.p_false:>9.4f}{col.ndcf:>8.4f}"
            )
        lines.append("-" * len(header))
        lines.append(f"{'mean':<26}{'':>9}{'':>8}{'':>9}{'':>9}{self.mean_ndcf:>8.4f}")
        lines.extend(f"* {note}" for note in self.flags)
        return "\n".join(lines) + "\n"


def decide_tc4tl(predicted_distance_m: float, threshold_m: float) -> bool:
    """预测距离 <= D 即判为 TC4TL（边界包含）"""
    return predicted_distance_m <= threshold_m


def confusion(records: list[TrialRecord], threshold_m: float) -> Confusion:
    """
    在阈值 D 下统计混淆计数

    真实距离 <= D 为 TC4TL；漏检 = 真 TC4TL 判为非 TC4TL，虚警 = 真非 TC4TL 判为 TC4TL
    """
    if not records:
        raise ValueError("混淆统计的记录集不能为空")
    truth = np.array([r.true_distance_m <= threshold_m for r in records])
    decided = np.array([decide_tc4tl(r.predicted_distance_m, threshold_m) for r in records])
    return Confusion(
        n_tc4tl=int(truth.sum()),
        n_not=int((~truth).sum()),
        misses=int((truth & ~decided).sum()),
        false_alarms=int((~truth & decided).sum()),
    )


def ndcf(p_miss: float, p_false: float, w_miss: float = 1.0, w_false: float = 1.0) -> float:
    """nDCF = (w_miss·P_miss + w_false·P_false) / min(w_miss, w_false)"""
    if not (w_miss > 0 and w_false > 0):
        raise ValueError(f"权重必须为正数: w_miss={w_miss}, w_false={w_false}")
    return (w_miss * p_miss + w_false * p_false) / min(w_miss, w_false)


def evaluate(records: list[TrialRecord], protocol: EvalProtocol | None = None) -> EvalReport:
    """
    按协议计算各列 nDCF 与均值

    缺失子集的列标记为缺失，不参与均值
    """
    protocol = protocol or EvalProtocol()
    if not records:
        raise ValueError("评分记录不能为空")

    by_grain = {g: [r for r in records if r.grain is g] for g in Grain}
    columns = []
    for grain, threshold in protocol.columns():
        subset = by_grain[grain]
        if not subset:
            logger.warning(f"{grain.value} 子集没有记录，D={threshold} 列缺失")
            columns.append(ColumnResult(grain, threshold, None, None))
            continue
        c = confusion(subset, threshold)
        if c.miss_undefined or c.false_undefined:
            logger.warning(f"{grain.value} D={threshold}: 比率分母为 0，记为 0")
        value = ndcf(c.p_miss, c.p_false, protocol.w_miss, protocol.w_false)
        columns.append(ColumnResult(grain, threshold, c, value))

    present = [col.ndcf for col in columns if col.present]
    mean = float(np.mean(present)) if present else 0.0
    return EvalReport(columns=columns, mean_ndcf=mean)
