"""
配置模块
带类型的配置 dataclass，INI 文件读写，以及写入模型包的配置摘要
"""

import configparser
import hashlib
import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from tsfex_core.evaluation import EvalProtocol
from tsfex_core.events import Grain, SensorKind
from tsfex_core.exceptions import ConfigError
from tsfex_core.features.base import FeatureBlockFactory
from tsfex_core.gbdt import GbdtConfig

logger = logging.getLogger(__name__)

ROUTINGS = ("dual", "single")
LEARNERS = ("gbdt", "ridge")


@dataclass
class PathsConfig:
    data_dir: str = "data"
    key_file: str = "data/key.csv"
    bundle: str = "model.npz"
    out: str = "out"


@dataclass
class FeatureRecipe:
    """单个粒度的特征配方"""

    blocks: tuple[str, ...] = ("baseline", "per_axis")
    sensors: tuple[str, ...] = ("BLE", "ACC", "GYR", "ATT")
    # count_above_s 阈值，INI 中写作 threshold_<SENSOR>
    thresholds: dict[str, float] = field(
        default_factory=lambda: {"BLE": -65.0, "ACC": 0.0, "GYR": 0.0, "ATT": 0.0}
    )


@dataclass
class ClusterBlockConfig:
    method: str = "kshape"
    k: int = 14
    sensors: tuple[str, ...] = ("ACC",)
    preprocess: str = "pad"
    series_length: int = 64
    metric: str = "euclidean"
    max_iter: int = 100
    # 单传感器 k，INI 中写作 k_<SENSOR>
    k_overrides: dict[str, int] = field(default_factory=dict)


@dataclass
class RocketBlockConfig:
    num_kernels: int = 1000
    sensors: tuple[str, ...] = ("ACC", "GYR", "ATT")
    series_length: int = 64


@dataclass
class LearnerConfig:
    learner: str = "gbdt"
    gbdt: GbdtConfig = field(default_factory=GbdtConfig)


@dataclass
class TunerConfig:
    budget: int = 40
    n_init: int = 5
    holdout: float = 0.2
    n_candidates: int = 1024


@dataclass
class SyntheticSpec:
    """合成语料参数"""

    n_events: int = 200
    fine_fraction: float = 0.5
    fine_distances: tuple[float, ...] = (1.2, 1.8, 3.0, 4.5)
    coarse_distances: tuple[float, ...] = (1.8, 4.5)
    rssi_sd_db: float = 4.0
    ble_rate_hz: float = 2.0
    imu_rate_hz: float = 10.0
    look_duration_s: float = 4.0
    gap_min_s: float = 10.0
    gap_max_s: float = 60.0
    look_p: float = 0.45
    max_looks: int = 10
    imu_step_sd: float = 0.05
    imu_smoothing: int = 5
    sensors: tuple[str, ...] = ("ACC", "GYR", "ATT", "ALT")
    seed: int = 0

    def __post_init__(self):
        if self.n_events < 1:
            raise ValueError(f"n_events 必须 >= 1: {self.n_events}")
        if self.rssi_sd_db < 0:
            raise ValueError(f"RSSI 噪声标准差不能为负: {self.rssi_sd_db}")
        if not 0 <= self.fine_fraction <= 1:
            raise ValueError(f"fine_fraction 必须在 [0, 1] 内: {self.fine_fraction}")
        if not 0 < self.look_p <= 1:
            raise ValueError(f"look_p 必须在 (0, 1] 内: {self.look_p}")
        if self.gap_min_s > self.gap_max_s:
            raise ValueError("gap_min_s 不能大于 gap_max_s")


@dataclass
class PipelineConfig:
    seed: int = 0
    routing: str = "dual"
    skip_threshold: float = 0.1
    n_jobs: int = 1
    paths: PathsConfig = field(default_factory=PathsConfig)
    features: dict[Grain, FeatureRecipe] = field(
        default_factory=lambda: {
            Grain.FINE: FeatureRecipe(),
            Grain.COARSE: FeatureRecipe(blocks=("baseline", "coarse_imu")),
        }
    )
    cluster: ClusterBlockConfig = field(default_factory=ClusterBlockConfig)
    rocket: RocketBlockConfig = field(default_factory=RocketBlockConfig)
    learners: dict[Grain, LearnerConfig] = field(
        default_factory=lambda: {Grain.FINE: LearnerConfig(), Grain.COARSE: LearnerConfig()}
    )
    tuner: TunerConfig = field(default_factory=TunerConfig)
    synthetic: SyntheticSpec = field(default_factory=SyntheticSpec)
    evaluation: EvalProtocol = field(default_factory=EvalProtocol)

    def validate(self) -> "PipelineConfig":
        """检查取值合法性，非法时抛 ConfigError"""
        if self.routing not in ROUTINGS:
            raise ConfigError(f"routing 必须为 {ROUTINGS} 之一: {self.routing}")
        known = set(FeatureBlockFactory.list_blocks())
        for grain, recipe in self.features.items():
            unknown = [b for b in recipe.blocks if b not in known]
            if unknown:
                raise ConfigError(f"features.{grain.value}: 未知特征块 {unknown}")
            _check_sensors(recipe.sensors, f"features.{grain.value}")
            _check_sensors(recipe.thresholds, f"features.{grain.value}")
        for grain, learner in self.learners.items():
            if learner.learner not in LEARNERS:
                raise ConfigError(f"learner.{grain.value}: 未知学习器 {learner.learner}")
        _check_sensors(self.cluster.sensors, "cluster")
        _check_sensors(self.cluster.k_overrides, "cluster")
        _check_sensors(self.rocket.sensors, "rocket")
        if not 0 <= self.skip_threshold <= 1:
            raise ConfigError(f"skip_threshold 必须在 [0, 1] 内: {self.skip_threshold}")
        if not 0 < self.tuner.holdout < 1:
            raise ConfigError(f"tuner.holdout 必须在 (0, 1) 内: {self.tuner.holdout}")
        return self

    def with_seed(self, seed: int) -> "PipelineConfig":
        return replace(self, seed=int(seed), synthetic=replace(self.synthetic, seed=int(seed)))

    def gbdt_config(self, grain: Grain) -> GbdtConfig:
        """该粒度的提升树配置（种子取全局种子）"""
        return replace(self.learners[grain].gbdt, seed=self.seed)


def _check_sensors(names, where: str) -> None:
    for name in names:
        try:
            SensorKind(name)
        except ValueError:
            raise ConfigError(f"{where}: 未知传感器 {name}") from None


def _render(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    if value is None:
        return "none"
    return str(value)


def _coerce(raw: str, current, where: str):
    """按当前取值的类型解析 INI 字符串"""
    text = raw.strip()
    try:
        if isinstance(current, bool):
            if text.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return text.lower() in ("true", "1", "yes")
        if isinstance(current, int):
            return int(text)
        if isinstance(current, float):
            return float(text)
        if isinstance(current, tuple):
            elem = type(current[0]) if current else str
            return tuple(elem(v.strip()) for v in text.split(",") if v.strip())
        if current is None:
            return None if text.lower() == "none" else int(text)
    except ValueError:
        raise ConfigError(f"{where}: 无法解析取值 '{raw}'") from None
    return text


def _apply(obj, items: dict[str, str], section: str, skip=(), prefixed=None):
    """
    将一个节的键值写入 dataclass

    prefixed: {前缀: 字段名}，如 {"k_": "k_overrides"} 把 k_ACC 写入字典字段
    """
    prefixed = prefixed or {}
    updates = {}
    names = {f.name for f in fields(obj)} - set(skip) - set(prefixed.values())
    for key, raw in items.items():
        if key in names:
            updates[key] = _coerce(raw, getattr(obj, key), f"[{section}] {key}")
            continue
        for prefix, target in prefixed.items():
            if key.startswith(prefix) and len(key) > len(prefix):
                mapping = dict(updates.get(target, getattr(obj, target)))
                sensor = key[len(prefix) :].upper()
                sample = next(iter(mapping.values()), 0 if prefix == "k_" else 0.0)
                mapping[sensor] = _coerce(raw, sample, f"[{section}] {key}")
                updates[target] = mapping
                break
        else:
            raise ConfigError(f"[{section}] 未知配置项: {key}")
    try:
        return replace(obj, **updates)
    except ValueError as e:
        raise ConfigError(f"[{section}] {e}") from None


def _section(parser: configparser.ConfigParser, name: str) -> dict[str, str]:
    return dict(parser.items(name)) if parser.has_section(name) else {}


_SECTIONS = (
    "pipeline",
    "paths",
    "features.fine",
    "features.coarse",
    "cluster",
    "rocket",
    "learner.fine",
    "learner.coarse",
    "tuner",
    "synthetic",
    "evaluation",
)


def parse_config(text: str) -> PipelineConfig:
    """解析 INI 文本；未知节或键抛 ConfigError"""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"配置文件格式错误: {e}") from None
    unknown = [s for s in parser.sections() if s not in _SECTIONS]
    if unknown:
        raise ConfigError(f"未知配置节: {unknown}")

    config = PipelineConfig()
    nested = (
        "paths", "features", "cluster", "rocket", "learners", "tuner", "synthetic", "evaluation"
    )
    config = _apply(config, _section(parser, "pipeline"), "pipeline", skip=nested)
    config.paths = _apply(config.paths, _section(parser, "paths"), "paths")
    for grain in Grain:
        name = f"features.{grain.value}"
        config.features[grain] = _apply(
            config.features[grain],
            _section(parser, name),
            name,
            prefixed={"threshold_": "thresholds"},
        )
        name = f"learner.{grain.value}"
        items = _section(parser, name)
        learner = config.learners[grain]
        if "learner" in items:
            learner = replace(learner, learner=items.pop("learner").strip())
        gbdt = _apply(learner.gbdt, items, name, skip=("seed", "n_classes"))
        config.learners[grain] = replace(learner, gbdt=gbdt)
    config.cluster = _apply(
        config.cluster, _section(parser, "cluster"), "cluster", prefixed={"k_": "k_overrides"}
    )
    config.rocket = _apply(config.rocket, _section(parser, "rocket"), "rocket")
    config.tuner = _apply(config.tuner, _section(parser, "tuner"), "tuner")
    config.synthetic = _apply(config.synthetic, _section(parser, "synthetic"), "synthetic")
    config.evaluation = _apply(config.evaluation, _section(parser, "evaluation"), "evaluation")
    return config.validate()


def load_config(path: str | Path | None) -> PipelineConfig:
    """读取配置文件；path 为空时返回默认配置"""
    if path is None:
        return PipelineConfig().validate()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"配置文件不存在: {path}")
    logger.info(f"读取配置: {path}")
    return parse_config(path.read_text(encoding="utf-8"))


def render_config(config: PipelineConfig) -> str:
    """规范化的 INI 文本（键顺序固定，用于摘要）"""
    sections: dict[str, dict[str, str]] = {
        "pipeline": {
            "seed": _render(config.seed),
            "routing": config.routing,
            "skip_threshold": _render(config.skip_threshold),
            "n_jobs": _render(config.n_jobs),
        },
        "paths": {f.name: _render(getattr(config.paths, f.name)) for f in fields(config.paths)},
    }
    for grain in Grain:
        recipe = config.features[grain]
        items = {"blocks": _render(recipe.blocks), "sensors": _render(recipe.sensors)}
        items.update({f"threshold_{k}": _render(v) for k, v in sorted(recipe.thresholds.items())})
        sections[f"features.{grain.value}"] = items
    cluster = {
        f.name: _render(getattr(config.cluster, f.name))
        for f in fields(config.cluster)
        if f.name != "k_overrides"
    }
    cluster.update({f"k_{k}": _render(v) for k, v in sorted(config.cluster.k_overrides.items())})
    sections["cluster"] = cluster
    sections["rocket"] = {
        f.name: _render(getattr(config.rocket, f.name)) for f in fields(config.rocket)
    }
    for grain in Grain:
        learner = config.learners[grain]
        items = {"learner": learner.learner}
        items.update(
            {
                f.name: _render(getattr(learner.gbdt, f.name))
                for f in fields(learner.gbdt)
                if f.name not in ("seed", "n_classes")
            }
        )
        sections[f"learner.{grain.value}"] = items
    sections["tuner"] = {
        f.name: _render(getattr(config.tuner, f.name)) for f in fields(config.tuner)
    }
    sections["synthetic"] = {
        f.name: _render(getattr(config.synthetic, f.name)) for f in fields(config.synthetic)
    }
    sections["evaluation"] = {
        f.name: _render(getattr(config.evaluation, f.name)) for f in fields(config.evaluation)
    }

    lines = []
    for name, items in sections.items():
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {v}" for k, v in items.items())
        lines.append("")
    return "\n".join(lines)


def save_config(config: PipelineConfig, path: str | Path) -> None:
    Path(path).write_text(render_config(config), encoding="utf-8")


def config_digest(config: PipelineConfig) -> str:
    """规范化文本的 SHA-256（不含 [paths]）"""
    text = render_config(replace(config, paths=PathsConfig()))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
