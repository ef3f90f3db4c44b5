"""
特征模块
"""

from tsfex_core.features.base import (
    FeatureBlock,
    FeatureBlockFactory,
    FeatureVector,
    vectors_to_frame,
)
from tsfex_core.features.baseline import BaselineBlock, PathLossParams, path_loss_distance
from tsfex_core.features.coarse_imu import CoarseImuBlock, coarse_engineered
from tsfex_core.features.normalizer import (
    NormStats,
    apply_normalizer,
    drop_constant_features,
    fit_normalizer,
)
from tsfex_core.features.per_axis import PerAxisStatsBlock, per_axis_features
from tsfex_core.features.series_blocks import ClusterLabelBlock, LookStatsBlock, RocketBlock
from tsfex_core.features.statistics import stat_features

__all__ = [
    "FeatureBlock",
    "FeatureBlockFactory",
    "FeatureVector",
    "vectors_to_frame",
    "BaselineBlock",
    "PathLossParams",
    "path_loss_distance",
    "CoarseImuBlock",
    "coarse_engineered",
    "NormStats",
    "apply_normalizer",
    "drop_constant_features",
    "fit_normalizer",
    "PerAxisStatsBlock",
    "per_axis_features",
    "ClusterLabelBlock",
    "LookStatsBlock",
    "RocketBlock",
    "stat_features",
]
