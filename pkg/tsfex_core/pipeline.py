"""
流程编排
语料加载、特征流程、按粒度路由的双模型训练、调参、预测与评分
"""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from tsfex_core.bayes_tuner import GBDT_SEARCH_SPACE, TuneResult, tune
from tsfex_core.bundle import ModelBundle, RouteBundle, load_bundle, save_bundle
from tsfex_core.config import PipelineConfig, config_digest, save_config
from tsfex_core.evaluation import EvalProtocol, EvalReport, TrialRecord, evaluate
from tsfex_core.events import ContactEvent, Grain, SensorKind, load_event, read_key_file
from tsfex_core.exceptions import DataError, EventParseError, LabelError, SchemaMismatchError
from tsfex_core.features.base import FeatureBlock, FeatureBlockFactory, vectors_to_frame
from tsfex_core.features.normalizer import drop_constant_features
from tsfex_core.gbdt import GbdtConfig, GbdtModel, gbdt_predict_distance, gbdt_train
from tsfex_core.ridge import RidgeClassifier

logger = logging.getLogger(__name__)

ROUTE_ALL = "all"
FEATURIZER_FILE = "featurizer.npz"
PREDICTION_COLUMNS = ["event_id", "predicted_distance_m"]
MIN_TUNE_ROWS_PER_CLASS = 10


# ---------------------------------------------------------------- 语料


def _try_load(path: Path) -> tuple[str, ContactEvent | None, str]:
    try:
        return path.stem, load_event(path), ""
    except (EventParseError, ValueError, OSError, UnicodeDecodeError) as e:
        return path.stem, None, str(e)


def load_corpus(
    data_dir: str | Path, skip_threshold: float = 0.1, n_jobs: int = 1
) -> list[ContactEvent]:
    """
    解析目录下全部 *.txt 事件文件

    无法解析的文件记录日志后跳过；跳过比例超过 skip_threshold 时中止

    Returns:
        按事件 ID 排序的事件列表

    Raises:
        DataError: 目录为空，或跳过比例超过阈值
    """
    data_dir = Path(data_dir)
    files = sorted(data_dir.glob("*.txt"))
    if not files:
        raise DataError(f"目录中没有事件文件: {data_dir}")

    results = Parallel(n_jobs=n_jobs)(
        delayed(_try_load)(p) for p in tqdm(files, desc="解析事件文件", leave=False)
    )
    events, skipped = [], []
    for event_id, event, error in results:
        if event is None:
            logger.warning(f"跳过无法解析的事件 {event_id}: {error}")
            skipped.append(event_id)
        else:
            events.append(event)

    ratio = len(skipped) / len(files)
    if ratio > skip_threshold:
        raise DataError(
            f"跳过的事件比例 {ratio:.1%} 超过阈值 {skip_threshold:.0%} "
            f"({len(skipped)}/{len(files)}): {skipped[:10]}"
        )
    logger.info(f"解析事件 {len(events)} 个，跳过 {len(skipped)} 个 ({data_dir})")
    return sorted(events, key=lambda e: e.id)


# ---------------------------------------------------------------- 路由


def route_grains(routing: str) -> dict[str, tuple[Grain, ...]]:
    """路由名 -> 该路由负责的粒度"""
    if routing == "dual":
        return {g.value: (g,) for g in Grain}
    return {ROUTE_ALL: tuple(Grain)}


def route_of(routing: str, event: ContactEvent) -> str:
    return event.grain.value if routing == "dual" else ROUTE_ALL


def _route_grain(route: str) -> Grain:
    """决定配方与学习器配置的粒度；单模型路由沿用 fine 配置"""
    return Grain.FINE if route == ROUTE_ALL else Grain(route)


def split_by_route(routing: str, events: list[ContactEvent]) -> dict[str, list[ContactEvent]]:
    groups: dict[str, list[ContactEvent]] = {}
    for event in events:
        groups.setdefault(route_of(routing, event), []).append(event)
    return {r: groups[r] for r in route_grains(routing) if r in groups}


# ---------------------------------------------------------------- 特征流程


def block_specs(route: str, config: PipelineConfig) -> list[tuple[str, dict]]:
    """
    某路由配方中的 (特征块名, 构造参数)

    参数均为可 JSON 序列化的值，随模型包保存
    """
    recipe = config.features[_route_grain(route)]
    specs = []
    for name in recipe.blocks:
        if name == "per_axis":
            params = {"sensors": list(recipe.sensors), "thresholds": dict(recipe.thresholds)}
        elif name == "cluster":
            c = config.cluster
            params = {
                "method": c.method,
                "k": c.k,
                "sensors": list(c.sensors),
                "preprocess": c.preprocess,
                "series_length": c.series_length,
                "k_overrides": dict(c.k_overrides),
                "metric": c.metric,
                "max_iter": c.max_iter,
                "seed": config.seed,
            }
        elif name == "rocket":
            r = config.rocket
            params = {
                "num_kernels": r.num_kernels,
                "sensors": list(r.sensors),
                "series_length": r.series_length,
                "seed": config.seed,
            }
        else:
            params = {}
        specs.append((name, params))
    return specs


def _column_sensor(column: str) -> SensorKind | None:
    for token in column.split("_"):
        try:
            return SensorKind(token)
        except ValueError:
            continue
    return None


class FeaturePipeline:
    """
    一条路由的特征流程：按配方顺序串联特征块，训练时剔除常数列

    fitted_columns 为训练时提取到的全部列，schema 为剔除常数列后送入学习器的列
    """

    _PARALLEL_BLOCKS = ("cluster", "rocket")

    def __init__(self, specs: list[tuple[str, dict]], n_jobs: int = 1):
        self.specs = [(name, dict(params)) for name, params in specs]
        self.n_jobs = n_jobs
        self.blocks: list[FeatureBlock] = [self._create(n, p) for n, p in self.specs]
        self.schema: list[str] = []
        self.fitted_columns: list[str] = []

    def _create(self, name: str, params: dict) -> FeatureBlock:
        if name in self._PARALLEL_BLOCKS:
            params = {**params, "n_jobs": self.n_jobs}
        return FeatureBlockFactory.create(name, **params)

    def extract(self, events: list[ContactEvent]) -> pd.DataFrame:
        per_block = [block.extract_many(events) for block in self.blocks]
        vectors = []
        for i in range(len(events)):
            merged = {}
            for block_vectors in per_block:
                merged.update(block_vectors[i])
            vectors.append(merged)
        return vectors_to_frame([e.id for e in events], vectors)

    def fit(self, events: list[ContactEvent]) -> pd.DataFrame:
        """
        在训练事件上拟合各特征块

        Returns:
            训练特征矩阵（已剔除常数列，列顺序即 schema）
        """
        if not events:
            raise ValueError("特征流程训练集不能为空")
        for block in self.blocks:
            block.fit(events)
        frame = self.extract(events)
        self.fitted_columns = list(frame.columns)
        kept, _ = drop_constant_features(frame)
        self.schema = list(kept.columns)
        logger.info(f"特征流程 {[n for n, _ in self.specs]}: {kept.shape[0]} 行 × {kept.shape[1]} 列")
        return kept

    def align(self, frame: pd.DataFrame, events: list[ContactEvent]) -> pd.DataFrame:
        """
        把提取结果对齐到训练 schema

        多余列报错；缺失列仅当其传感器在整批事件中都不存在时补 0，否则报错
        """
        fitted = set(self.fitted_columns)
        extra = [c for c in frame.columns if c not in fitted]
        present = {kind for e in events for kind in SensorKind if e.has(kind)}
        missing = []
        for column in self.fitted_columns:
            if column in frame.columns:
                continue
            sensor = _column_sensor(column)
            if sensor is None or sensor in present:
                missing.append(column)
        if missing or extra:
            raise SchemaMismatchError(missing, extra)
        return frame.reindex(columns=self.schema, fill_value=0.0)

    def transform(self, events: list[ContactEvent]) -> pd.DataFrame:
        if not self.schema and not self.fitted_columns:
            raise RuntimeError("FeaturePipeline 尚未 fit")
        return self.align(self.extract(events), events)

    def get_state(self) -> dict:
        return {
            "blocks": [
                {"name": name, "params": params, "state": block.get_state()}
                for (name, params), block in zip(self.specs, self.blocks)
            ],
            "schema": list(self.schema),
            "fitted_columns": list(self.fitted_columns),
        }

    @classmethod
    def from_state(
        cls, blocks: list[dict], schema: list[str], fitted_columns: list[str], n_jobs: int = 1
    ) -> "FeaturePipeline":
        pipeline = cls([(b["name"], b["params"]) for b in blocks], n_jobs=n_jobs)
        for block, saved in zip(pipeline.blocks, blocks):
            if saved["state"]:
                block.set_state(saved["state"])
        pipeline.schema = list(schema)
        pipeline.fitted_columns = list(fitted_columns)
        return pipeline


# ---------------------------------------------------------------- 学习器


def fit_learner(
    learner: str,
    X: np.ndarray,
    y: np.ndarray,
    gbdt_config: GbdtConfig | None = None,
    n_jobs: int = 1,
) -> GbdtModel | RidgeClassifier:
    """按名称训练学习器；类别集合取 y 中出现的距离"""
    if learner == "gbdt":
        return gbdt_train(X, y, gbdt_config, n_jobs=n_jobs)
    if learner == "ridge":
        return RidgeClassifier().fit(X, y)
    raise ValueError(f"未知学习器: {learner}")


def predict_learner(model: GbdtModel | RidgeClassifier, X: np.ndarray) -> np.ndarray:
    if isinstance(model, GbdtModel):
        return gbdt_predict_distance(model, X)
    return model.predict(X)


def _learner_from_state(learner: str, state: dict) -> GbdtModel | RidgeClassifier:
    if learner == "gbdt":
        return GbdtModel.from_state(state)
    if learner == "ridge":
        return RidgeClassifier.from_state(state)
    raise DataError(f"模型包中的学习器未知: {learner}")


@dataclass
class RouteModel:
    """单条路由：特征流程 + 学习器"""

    name: str
    grains: tuple[Grain, ...]
    features: FeaturePipeline
    learner: str = ""
    model: GbdtModel | RidgeClassifier | None = None

    @property
    def classes(self) -> np.ndarray:
        if self.model is None:
            return np.zeros(0)
        return np.asarray(self.model.classes, dtype=np.float64)

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        if self.model is None:
            raise RuntimeError(f"路由 {self.name} 尚未训练学习器")
        return predict_learner(self.model, X)

    def predict(self, events: list[ContactEvent]) -> np.ndarray:
        return self.predict_matrix(self.features.transform(events).to_numpy())


@dataclass
class RouteTrainStats:
    n_rows: int
    n_features: int
    classes: list[float]
    accuracy: float
    train_loss: list[float] = field(default_factory=list)


@dataclass
class TrainReport:
    routes: dict[str, RouteTrainStats] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "route": name,
                "n_rows": s.n_rows,
                "n_features": s.n_features,
                "n_classes": len(s.classes),
                "accuracy": s.accuracy,
                "final_loss": s.train_loss[-1] if s.train_loss else np.nan,
            }
            for name, s in self.routes.items()
        ]
        return pd.DataFrame(rows)


def _labels_for(ids, labels: pd.Series) -> np.ndarray:
    missing = [i for i in ids if i not in labels.index]
    if missing:
        raise LabelError(f"{len(missing)} 个事件缺少标签: {missing[:10]}")
    return labels.loc[list(ids)].to_numpy(dtype=np.float64)


class ProximitySystem:
    """
    距离分类系统

    routing=dual 时 fine / coarse 各一条路由（各自配方与学习器），
    routing=single 时所有事件共用一条路由，类别为两种粒度距离的并集
    """

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.routes: dict[str, RouteModel] = {}

    @property
    def absent_routes(self) -> list[str]:
        return [r for r in route_grains(self.config.routing) if r not in self.routes]

    def fit_features(self, events: list[ContactEvent]) -> dict[str, pd.DataFrame]:
        """拟合各路由的特征流程，返回训练特征矩阵"""
        groups = split_by_route(self.config.routing, events)
        grains = route_grains(self.config.routing)
        matrices = {}
        self.routes = {}
        for route, route_events in groups.items():
            pipeline = FeaturePipeline(block_specs(route, self.config), self.config.n_jobs)
            matrices[route] = pipeline.fit(route_events)
            self.routes[route] = RouteModel(route, grains[route], pipeline)
        for route in self.absent_routes:
            logger.warning(f"语料中没有 {route} 路由的事件，该路由模型缺失")
        return matrices

    def learner_for(self, route: str) -> tuple[str, GbdtConfig]:
        grain = _route_grain(route)
        return self.config.learners[grain].learner, self.config.gbdt_config(grain)

    def fit_learners(self, matrices: dict[str, pd.DataFrame], labels: pd.Series) -> TrainReport:
        """
        在各路由特征矩阵上训练学习器

        Args:
            matrices: 路由名 -> 特征矩阵（以 event_id 为索引，列为 schema）
            labels: event_id -> 真实距离（米）

        Raises:
            LabelError: 有行缺少标签
            SchemaMismatchError: 矩阵列与特征流程 schema 不一致
        """
        report = TrainReport()
        for route, matrix in matrices.items():
            rm = self.routes[route]
            if list(matrix.columns) != rm.features.schema:
                schema = set(rm.features.schema)
                raise SchemaMismatchError(
                    [c for c in rm.features.schema if c not in matrix.columns],
                    [c for c in matrix.columns if c not in schema],
                )
            X = matrix.to_numpy(dtype=np.float64)
            y = _labels_for(matrix.index, labels)
            learner, gbdt_config = self.learner_for(route)
            rm.learner = learner
            rm.model = fit_learner(learner, X, y, gbdt_config, self.config.n_jobs)
            accuracy = float(np.mean(rm.predict_matrix(X) == y))
            loss = list(rm.model.train_loss) if isinstance(rm.model, GbdtModel) else []
            report.routes[route] = RouteTrainStats(
                n_rows=len(X),
                n_features=X.shape[1],
                classes=rm.classes.tolist(),
                accuracy=accuracy,
                train_loss=loss,
            )
            logger.info(
                f"路由 {route}: {learner} 训练完成, {len(X)} 行 × {X.shape[1]} 列, "
                f"类别 {rm.classes.tolist()}, 训练准确率 {accuracy:.4f}"
            )
        return report

    def fit(self, events: list[ContactEvent], labels: pd.Series) -> TrainReport:
        return self.fit_learners(self.fit_features(events), labels)

    def predict(self, events: list[ContactEvent]) -> pd.Series:
        """
        按路由预测距离

        Returns:
            以 event_id 为索引、按 ID 排序的预测距离

        Raises:
            DataError: 事件所属路由在模型包中缺失
        """
        groups = split_by_route(self.config.routing, events)
        absent = [r for r in groups if r not in self.routes]
        if absent:
            raise DataError(f"模型包中没有路由 {absent} 的模型")
        parts = []
        for route, route_events in groups.items():
            predicted = self.routes[route].predict(route_events)
            parts.append(pd.Series(predicted, index=[e.id for e in route_events]))
        result = pd.concat(parts).sort_index() if parts else pd.Series(dtype=np.float64)
        result.index.name = "event_id"
        result.name = "predicted_distance_m"
        return result

    def provenance(self) -> dict:
        return {
            "seed": self.config.seed,
            "routing": self.config.routing,
            "config_digest": config_digest(self.config),
            "absent_routes": self.absent_routes,
        }

    def to_bundle(self) -> ModelBundle:
        routes = {}
        for name, rm in self.routes.items():
            state = rm.features.get_state()
            routes[name] = RouteBundle(
                grains=[g.value for g in rm.grains],
                schema=state["schema"],
                fitted_columns=state["fitted_columns"],
                blocks=state["blocks"],
                learner=rm.learner,
                learner_state={} if rm.model is None else rm.model.get_state(),
                classes=rm.classes.tolist(),
            )
        return ModelBundle(routes=routes, provenance=self.provenance())

    @classmethod
    def from_bundle(cls, bundle: ModelBundle, config: PipelineConfig) -> "ProximitySystem":
        """由模型包恢复；路由方式以模型包为准"""
        routing = bundle.provenance.get("routing", config.routing)
        system = cls(replace(config, routing=routing))
        for name, rb in bundle.routes.items():
            features = FeaturePipeline.from_state(
                rb.blocks, rb.schema, rb.fitted_columns, config.n_jobs
            )
            model = _learner_from_state(rb.learner, rb.learner_state) if rb.learner else None
            system.routes[name] = RouteModel(
                name, tuple(Grain(g) for g in rb.grains), features, rb.learner, model
            )
        return system


# ---------------------------------------------------------------- 命令


def matrix_path(out_dir: Path, route: str) -> Path:
    return out_dir / f"{route}_features.csv"


def schema_path(out_dir: Path, route: str) -> Path:
    return out_dir / f"{route}_schema.txt"


def write_matrix(matrix: pd.DataFrame, out_dir: Path, route: str) -> None:
    matrix.to_csv(matrix_path(out_dir, route), index_label="event_id")
    schema_path(out_dir, route).write_text("".join(f"{c}\n" for c in matrix.columns), "utf-8")


def read_matrix(out_dir: Path, route: str) -> pd.DataFrame:
    path = matrix_path(out_dir, route)
    if not path.exists():
        raise DataError(f"特征矩阵不存在: {path}")
    frame = pd.read_csv(path, dtype={"event_id": str}).set_index("event_id")
    return frame.astype(np.float64)


def cmd_featurize(
    config: PipelineConfig, data_dir: str | Path, out_dir: str | Path
) -> dict[str, pd.DataFrame]:
    """
    拟合特征流程并写出各路由特征矩阵

    写出 <route>_features.csv、<route>_schema.txt 与特征流程状态 featurizer.npz
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    events = load_corpus(data_dir, config.skip_threshold, config.n_jobs)
    system = ProximitySystem(config)
    matrices = system.fit_features(events)
    for route, matrix in matrices.items():
        write_matrix(matrix, out_dir, route)
    save_bundle(system.to_bundle(), out_dir / FEATURIZER_FILE)
    return matrices


def _load_featurized(config: PipelineConfig, features_dir: Path):
    featurizer = load_bundle(features_dir / FEATURIZER_FILE)
    system = ProximitySystem.from_bundle(featurizer, config)
    matrices = {route: read_matrix(features_dir, route) for route in system.routes}
    return system, matrices


def key_labels(key: pd.DataFrame) -> pd.Series:
    return key["distance_m"].astype(np.float64)


def cmd_train(
    config: PipelineConfig,
    features_dir: str | Path,
    key_path: str | Path,
    bundle_path: str | Path,
) -> tuple[ModelBundle, TrainReport]:
    """
    在特征矩阵上训练各路由学习器并保存模型包

    Raises:
        LabelError: 有行缺少标签
    """
    system, matrices = _load_featurized(config, Path(features_dir))
    system.config = replace(config, routing=system.config.routing)
    report = system.fit_learners(matrices, key_labels(read_key_file(key_path)))
    bundle = system.to_bundle()
    save_bundle(bundle, bundle_path)
    return bundle, report


def stratified_holdout(
    y: np.ndarray, fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """
    按类别分层划分训练 / 验证索引

    每个类别至少留 1 行在两侧；某类少于 2 行时报错
    """
    rng = np.random.default_rng(seed)
    train_idx, hold_idx = [], []
    for value in np.unique(y):
        members = np.flatnonzero(y == value)
        if len(members) < 2:
            raise LabelError(f"类别 {value} 只有 {len(members)} 行，无法划分验证集")
        if len(members) < MIN_TUNE_ROWS_PER_CLASS:
            logger.warning(f"类别 {value} 只有 {len(members)} 行，验证结果方差较大")
        members = rng.permutation(members)
        n_hold = min(len(members) - 1, max(1, int(round(fraction * len(members)))))
        hold_idx.extend(members[:n_hold].tolist())
        train_idx.extend(members[n_hold:].tolist())
    return np.sort(train_idx), np.sort(hold_idx)


def holdout_objective(
    X: np.ndarray,
    y: np.ndarray,
    grains: list[Grain],
    ids: list[str],
    base: GbdtConfig,
    fraction: float,
    seed: int,
    protocol: EvalProtocol | None = None,
    n_jobs: int = 1,
):
    """构造调参目标：给定超参数，返回验证集上各列 nDCF 的均值"""
    train_idx, hold_idx = stratified_holdout(y, fraction, seed)
    classes = np.unique(y)

    def objective(params: dict) -> float:
        cfg = replace(base, **params)
        model = gbdt_train(X[train_idx], y[train_idx], cfg, classes=classes, n_jobs=n_jobs)
        predicted = gbdt_predict_distance(model, X[hold_idx])
        records = [
            TrialRecord(ids[i], grains[i], float(y[i]), float(p))
            for i, p in zip(hold_idx, predicted)
        ]
        return evaluate(records, protocol).mean_ndcf

    return objective


def cmd_tune(
    config: PipelineConfig,
    features_dir: str | Path,
    key_path: str | Path,
    out_dir: str | Path,
) -> tuple[PipelineConfig, dict[str, TuneResult]]:
    """
    在各路由特征矩阵上做贝叶斯调参

    默认提升树配置作为初始设计的第一个点；写出 <route>_tuning.csv 与 tuned.ini
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    system, matrices = _load_featurized(config, Path(features_dir))
    key = read_key_file(key_path)
    labels = key_labels(key)
    tuned = config
    results = {}
    for route, matrix in matrices.items():
        learner, base = system.learner_for(route)
        if learner != "gbdt":
            logger.warning(f"路由 {route} 的学习器为 {learner}，跳过调参")
            continue
        ids = list(matrix.index)
        y = _labels_for(ids, labels)
        grains = [Grain(g) for g in key.loc[ids, "grain"]]
        objective = holdout_objective(
            matrix.to_numpy(dtype=np.float64),
            y,
            grains,
            ids,
            base,
            config.tuner.holdout,
            config.seed,
            protocol=config.evaluation,
            n_jobs=config.n_jobs,
        )
        default = {name: getattr(base, name) for name in GBDT_SEARCH_SPACE.names}
        logger.info(f"路由 {route}: 开始调参，预算 {config.tuner.budget}")
        result = tune(
            objective,
            GBDT_SEARCH_SPACE,
            budget=config.tuner.budget,
            n_init=config.tuner.n_init,
            seed=config.seed,
            initial_configs=[default],
            n_candidates=config.tuner.n_candidates,
        )
        results[route] = result
        result.history_frame().to_csv(out_dir / f"{route}_tuning.csv", index=False)

        grain = _route_grain(route)
        learners = dict(tuned.learners)
        learners[grain] = replace(
            learners[grain], gbdt=replace(learners[grain].gbdt, **result.best.params)
        )
        tuned = replace(tuned, learners=learners)
    save_config(tuned, out_dir / "tuned.ini")
    return tuned, results


def cmd_predict(
    config: PipelineConfig,
    bundle_path: str | Path,
    data_dir: str | Path,
    out_path: str | Path,
) -> pd.DataFrame:
    """预测语料中每个事件的距离，写出 event_id,predicted_distance_m（按 ID 排序）"""
    system = ProximitySystem.from_bundle(load_bundle(bundle_path), config)
    events = load_corpus(data_dir, config.skip_threshold, config.n_jobs)
    predicted = system.predict(events)
    frame = predicted.reset_index()[PREDICTION_COLUMNS]
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out_path, index=False)
    logger.info(f"预测完成: {len(frame)} 个事件 -> {out_path}")
    return frame


def read_predictions(path: str | Path) -> pd.DataFrame:
    frame = pd.read_csv(path, dtype={"event_id": str})
    missing = set(PREDICTION_COLUMNS) - set(frame.columns)
    if missing:
        raise DataError(f"预测文件缺少列: {sorted(missing)}")
    return frame


def score_predictions(
    predictions: pd.DataFrame, key: pd.DataFrame, protocol: EvalProtocol | None = None
) -> EvalReport:
    """
    预测与标签对齐后评分

    Raises:
        LabelError: 有预测 ID 不在标签文件中
    """
    unmatched = sorted(set(predictions["event_id"]) - set(key.index))
    if unmatched:
        raise LabelError(f"{len(unmatched)} 个预测 ID 不在标签文件中: {unmatched[:10]}")
    records = [
        TrialRecord(
            event_id=row.event_id,
            grain=Grain(key.at[row.event_id, "grain"]),
            true_distance_m=float(key.at[row.event_id, "distance_m"]),
            predicted_distance_m=float(row.predicted_distance_m),
        )
        for row in predictions.sort_values("event_id").itertuples(index=False)
    ]
    return evaluate(records, protocol)


def cmd_score(
    predictions_path: str | Path,
    key_path: str | Path,
    out_dir: str | Path,
    protocol: EvalProtocol | None = None,
) -> EvalReport:
    """评分并写出 report.txt 与 report.csv"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    predictions = read_predictions(predictions_path)
    report = score_predictions(predictions, read_key_file(key_path), protocol)
    (out_dir / "report.txt").write_text(report.to_text(), encoding="utf-8")
    report.to_csv(out_dir / "report.csv")
    logger.info(f"评分完成: 平均 nDCF {report.mean_ndcf:.4f}")
    return report
