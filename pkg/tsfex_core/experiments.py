"""
方法对比
同一训练 / 验证划分上训练并评分各特征方案，输出四列 nDCF 与均值
"""

import logging
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd

from tsfex_core.config import ClusterBlockConfig, FeatureRecipe, LearnerConfig, PipelineConfig
from tsfex_core.evaluation import EvalProtocol, TrialRecord, evaluate
from tsfex_core.events import ContactEvent, Grain, read_key_file
from tsfex_core.pipeline import (
    ProximitySystem,
    _labels_for,
    key_labels,
    load_corpus,
    stratified_holdout,
)

logger = logging.getLogger(__name__)

APPROACHES = (
    "baseline",
    "kshape_pad",
    "kmeans_resample",
    "kmeans_imu",
    "rocket_ridge",
    "rocket_gbdt",
    "dual",
)

IMU_SENSORS = ("ACC", "GYR", "ATT", "GRA", "MAG")


def _single(config: PipelineConfig, blocks: tuple[str, ...], learner: str = "gbdt", **extra):
    """单模型变体：两种粒度共用 fine 配方与学习器配置"""
    fine = config.features[Grain.FINE]
    features = dict(config.features)
    features[Grain.FINE] = replace(fine, blocks=blocks)
    learners = dict(config.learners)
    learners[Grain.FINE] = LearnerConfig(learner=learner, gbdt=learners[Grain.FINE].gbdt)
    return replace(config, routing="single", features=features, learners=learners, **extra)


def approach_config(name: str, config: PipelineConfig) -> PipelineConfig:
    """
    由基础配置派生某个方案的配置

    Args:
        name: APPROACHES 之一
        config: 基础配置（种子、并行度、学习器超参数）
    """
    if name == "baseline":
        return _single(config, ("baseline",))
    if name == "kshape_pad":
        cluster = ClusterBlockConfig(method="kshape", k=14, sensors=("ACC",), preprocess="pad")
        return _single(config, ("baseline", "cluster"), cluster=cluster)
    if name == "kmeans_resample":
        cluster = ClusterBlockConfig(method="kmeans", k=4, sensors=("ACC",), preprocess="resample")
        return _single(config, ("baseline", "cluster"), cluster=cluster)
    if name == "kmeans_imu":
        cluster = ClusterBlockConfig(
            method="kmeans", k=5, sensors=IMU_SENSORS, preprocess="resample"
        )
        return _single(config, ("baseline", "cluster"), cluster=cluster)
    if name == "rocket_ridge":
        return _single(config, ("rocket",), learner="ridge")
    if name == "rocket_gbdt":
        return _single(config, ("rocket",))
    if name == "dual":
        return replace(config, routing="dual")
    raise ValueError(f"未知方案: {name}")


def _strata(events: list[ContactEvent], labels: pd.Series) -> np.ndarray:
    distances = _labels_for([e.id for e in events], labels)
    flags = np.array([e.grain.flag for e in events], dtype=np.float64)
    return distances + 100.0 * flags


def run_approach(
    name: str,
    config: PipelineConfig,
    train: list[ContactEvent],
    holdout: list[ContactEvent],
    labels: pd.Series,
    protocol: EvalProtocol | None = None,
) -> dict:
    """训练单个方案并在验证集上评分，返回一行结果"""
    variant = approach_config(name, config)
    system = ProximitySystem(variant)
    system.fit(train, labels)
    predicted = system.predict(holdout)
    records = [
        TrialRecord(e.id, e.grain, float(labels[e.id]), float(predicted[e.id])) for e in holdout
    ]
    report = evaluate(records, protocol)
    row = {"approach": name}
    row.update({col.label: col.ndcf if col.present else np.nan for col in report.columns})
    row["mean"] = report.mean_ndcf
    logger.info(f"方案 {name}: 平均 nDCF {report.mean_ndcf:.4f}")
    return row


def compare(
    config: PipelineConfig,
    events: list[ContactEvent],
    labels: pd.Series,
    approaches=APPROACHES,
    protocol: EvalProtocol | None = None,
) -> pd.DataFrame:
    """
    在同一分层划分上对比各方案

    Returns:
        每个方案一行：approach、各报告列 nDCF、mean
    """
    unknown = [a for a in approaches if a not in APPROACHES]
    if unknown:
        raise ValueError(f"未知方案: {unknown}")
    train_idx, hold_idx = stratified_holdout(
        _strata(events, labels), config.tuner.holdout, config.seed
    )
    train = [events[i] for i in train_idx]
    holdout = [events[i] for i in hold_idx]
    logger.info(f"对比划分: 训练 {len(train)} 个事件, 验证 {len(holdout)} 个事件")
    protocol = protocol or config.evaluation
    rows = [run_approach(a, config, train, holdout, labels, protocol) for a in approaches]
    return pd.DataFrame(rows)


def cmd_compare(
    config: PipelineConfig,
    data_dir: str | Path,
    key_path: str | Path,
    out_dir: str | Path,
    approaches=APPROACHES,
) -> pd.DataFrame:
    """读取语料与标签，运行对比并写出 compare.csv"""
    events = load_corpus(data_dir, config.skip_threshold, config.n_jobs)
    labels = key_labels(read_key_file(key_path))
    table = compare(config, events, labels, approaches)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table.to_csv(out_dir / "compare.csv", index=False, float_format="%.6f")
    return table
