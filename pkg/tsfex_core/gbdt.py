"""
正则化梯度提升决策树（二阶提升，softmax 目标）
精确贪心分裂：候选阈值为相邻不同取值的中点
"""

import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np
from joblib import Parallel, delayed

logger = logging.getLogger(__name__)

_MIN_HESSIAN = 1e-16


@dataclass
class GbdtConfig:
    """提升树超参数"""

    n_trees: int = 100
    max_depth: int = 4
    learning_rate: float = 0.1
    l2_lambda: float = 1.0
    min_split_gain: float = 0.0
    min_child_weight: float = 1.0
    subsample: float = 1.0
    colsample: float = 1.0
    seed: int = 0
    n_classes: int | None = None

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError(f"n_trees 必须 >= 1: {self.n_trees}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth 必须 >= 1: {self.max_depth}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate 必须为正数: {self.learning_rate}")
        if self.l2_lambda < 0:
            raise ValueError(f"l2_lambda 不能为负: {self.l2_lambda}")
        if self.min_split_gain < 0 or self.min_child_weight < 0:
            raise ValueError("min_split_gain 与 min_child_weight 不能为负")
        for name in ("subsample", "colsample"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ValueError(f"{name} 必须在 (0, 1] 内: {value}")


@dataclass
class Tree:
    """
    数组形式的二叉树

    feature[i] = -1 表示叶节点；内部节点按 x <= threshold 走左子树
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        while True:
            internal = self.feature[node] >= 0
            if not internal.any():
                break
            r = rows[internal]
            n = node[internal]
            go_left = X[r, self.feature[n]] <= self.threshold[n]
            node[internal] = np.where(go_left, self.left[n], self.right[n])
        return self.value[node]

    @property
    def n_leaves(self) -> int:
        return int(np.count_nonzero(self.feature < 0))

    def get_state(self) -> dict:
        return {
            "feature": self.feature.astype("<i8"),
            "threshold": self.threshold.astype("<f8"),
            "left": self.left.astype("<i8"),
            "right": self.right.astype("<i8"),
            "value": self.value.astype("<f8"),
        }

    @classmethod
    def from_state(cls, state: dict) -> "Tree":
        return cls(
            feature=np.asarray(state["feature"], dtype=np.int64),
            threshold=np.asarray(state["threshold"], dtype=np.float64),
            left=np.asarray(state["left"], dtype=np.int64),
            right=np.asarray(state["right"], dtype=np.int64),
            value=np.asarray(state["value"], dtype=np.float64),
        )


@dataclass
class GbdtModel:
    """训练好的提升树模型：trees[轮次][类别]"""

    config: GbdtConfig
    classes: np.ndarray
    n_features: int
    trees: list[list[Tree]] = field(default_factory=list)
    base_score: float = 0.0
    train_loss: list[float] = field(default_factory=list)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def raw_scores(self, X: np.ndarray) -> np.ndarray:
        scores = np.full((len(X), self.n_classes), self.base_score)
        for round_trees in self.trees:
            for c, tree in enumerate(round_trees):
                scores[:, c] += tree.predict(X)
        return scores

    def get_state(self) -> dict:
        return {
            "config": asdict(self.config),
            "classes": np.asarray(self.classes, dtype="<f8"),
            "n_features": self.n_features,
            "base_score": self.base_score,
            "train_loss": list(self.train_loss),
            "trees": [[t.get_state() for t in round_trees] for round_trees in self.trees],
        }

    @classmethod
    def from_state(cls, state: dict) -> "GbdtModel":
        return cls(
            config=GbdtConfig(**state["config"]),
            classes=np.asarray(state["classes"], dtype=np.float64),
            n_features=int(state["n_features"]),
            trees=[[Tree.from_state(t) for t in rt] for rt in state["trees"]],
            base_score=float(state["base_score"]),
            train_loss=[float(v) for v in state["train_loss"]],
        )

    def to_bytes(self) -> bytes:
        """确定性的二进制表示（小端）"""
        header = {
            "config": asdict(self.config),
            "n_features": self.n_features,
            "base_score": self.base_score,
            "shape": [[len(t.feature) for t in rt] for rt in self.trees],
        }
        parts = [json.dumps(header, sort_keys=True).encode("utf-8")]
        parts.append(np.asarray(self.classes, dtype="<f8").tobytes())
        for round_trees in self.trees:
            for tree in round_trees:
                parts.extend(arr.tobytes() for arr in tree.get_state().values())
        return b"".join(parts)


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _log_loss(proba: np.ndarray, y_index: np.ndarray) -> float:
    p = proba[np.arange(len(y_index)), y_index]
    return float(-np.mean(np.log(np.maximum(p, 1e-300))))


def _best_in_chunk(
    X: np.ndarray,
    order: np.ndarray,
    in_node: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    features: np.ndarray,
    G: float,
    H: float,
    config: GbdtConfig,
) -> tuple[float, int, float]:
    """
    一组特征上的最优分裂

    Returns:
        (增益, 特征下标, 阈值)；无合法分裂时增益为 -inf
    """
    lam = config.l2_lambda
    cols = order[:, features].T
    mask = in_node[cols]
    m = int(mask[0].sum())
    node_rows = cols[mask].reshape(len(features), m)
    values = X[node_rows, features[:, None]]
    GL = np.cumsum(g[node_rows], axis=1)[:, :-1]
    HL = np.cumsum(h[node_rows], axis=1)[:, :-1]
    GR = G - GL
    HR = H - HL
    gain = 0.5 * (GL**2 / (HL + lam) + GR**2 / (HR + lam) - G**2 / (H + lam))
    gain = gain - config.min_split_gain
    valid = (
        (values[:, :-1] < values[:, 1:])
        & (HL >= config.min_child_weight)
        & (HR >= config.min_child_weight)
    )
    gain = np.where(valid, gain, -np.inf)
    if gain.size == 0:
        return -np.inf, -1, 0.0
    flat = int(np.argmax(gain))
    f_pos, i = divmod(flat, gain.shape[1])
    best = float(gain[f_pos, i])
    if not np.isfinite(best):
        return -np.inf, -1, 0.0
    threshold = 0.5 * (values[f_pos, i] + values[f_pos, i + 1])
    return best, int(features[f_pos]), float(threshold)


class _TreeBuilder:
    """按深度优先构建单棵树"""

    def __init__(self, X, order, g, h, features, config: GbdtConfig, n_jobs: int):
        self.X = X
        self.order = order
        self.g = g
        self.h = h
        self.features = features
        self.config = config
        self.n_jobs = n_jobs
        self.nodes: list[list] = []

    def _find_split(self, in_node: np.ndarray, G: float, H: float) -> tuple[float, int, float]:
        if self.n_jobs == 1 or len(self.features) < 2:
            return _best_in_chunk(
                self.X, self.order, in_node, self.g, self.h, self.features, G, H, self.config
            )
        chunks = [c for c in np.array_split(self.features, self.n_jobs) if len(c)]
        results = Parallel(n_jobs=self.n_jobs, prefer="threads")(
            delayed(_best_in_chunk)(
                self.X, self.order, in_node, self.g, self.h, chunk, G, H, self.config
            )
            for chunk in chunks
        )
        # 块按特征下标升序排列，增益相同取靠前的块
        best = (-np.inf, -1, 0.0)
        for result in results:
            if result[0] > best[0]:
                best = result
        return best

    def build(self, in_node: np.ndarray, depth: int) -> int:
        index = len(self.nodes)
        self.nodes.append([-1, 0.0, -1, -1, 0.0])
        G = float(self.g[in_node].sum())
        H = float(self.h[in_node].sum())

        if depth < self.config.max_depth and np.count_nonzero(in_node) >= 2:
            gain, feature, threshold = self._find_split(in_node, G, H)
            if gain > 0:
                goes_left = self.X[:, feature] <= threshold
                left = self.build(in_node & goes_left, depth + 1)
                right = self.build(in_node & ~goes_left, depth + 1)
                self.nodes[index] = [feature, threshold, left, right, 0.0]
                return index

        weight = -G / (H + self.config.l2_lambda) * self.config.learning_rate
        self.nodes[index][4] = weight
        return index

    def tree(self) -> Tree:
        arr = list(zip(*self.nodes))
        return Tree(
            feature=np.array(arr[0], dtype=np.int64),
            threshold=np.array(arr[1], dtype=np.float64),
            left=np.array(arr[2], dtype=np.int64),
            right=np.array(arr[3], dtype=np.int64),
            value=np.array(arr[4], dtype=np.float64),
        )


def _check_features(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"特征矩阵必须为二维，实际维度为 {X.ndim}")
    if not np.all(np.isfinite(X)):
        raise ValueError("特征矩阵包含非有限值")
    return X


def gbdt_train(
    X,
    y,
    config: GbdtConfig | None = None,
    classes=None,
    n_jobs: int = 1,
) -> GbdtModel:
    """
    训练 softmax 提升树

    每轮对每个类别拟合一棵树：g = p − onehot，h = max(2p(1−p), 1e-16)；
    分裂增益 ½[G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)] − γ，叶权重 −G/(H+λ)·η

    Args:
        X: n × p 特征矩阵
        y: 类别标签（距离值，米）
        config: 超参数
        classes: 期望的类别集合；给定时每个类别都必须出现
        n_jobs: 节点内分裂搜索的并行线程数（不影响结果）

    Returns:
        GbdtModel
    """
    config = config or GbdtConfig()
    X = _check_features(X)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if len(X) != len(y):
        raise ValueError(f"样本数不一致: X {len(X)} 行, y {len(y)} 个")
    if len(X) < 2:
        raise ValueError(f"训练样本数必须 >= 2，实际为 {len(X)}")

    observed = np.unique(y)
    if classes is None:
        class_values = observed
    else:
        class_values = np.unique(np.asarray(classes, dtype=np.float64))
        absent = np.setdiff1d(class_values, observed)
        if len(absent):
            raise ValueError(f"类别 {absent.tolist()} 没有训练样本")
        unknown = np.setdiff1d(observed, class_values)
        if len(unknown):
            raise ValueError(f"标签 {unknown.tolist()} 不在类别集合中")
    if config.n_classes is not None and config.n_classes != len(class_values):
        raise ValueError(f"n_classes={config.n_classes} 与实际类别数 {len(class_values)} 不一致")

    n, p = X.shape
    K = len(class_values)
    y_index = np.searchsorted(class_values, y)
    onehot = np.zeros((n, K))
    onehot[np.arange(n), y_index] = 1.0

    model = GbdtModel(config=config, classes=class_values, n_features=p)
    scores = np.zeros((n, K))
    model.train_loss.append(_log_loss(_softmax(scores), y_index))
    if K == 1:
        logger.info(f"只有一个类别 {class_values[0]}，不训练树")
        return model

    order = np.argsort(X, axis=0, kind="stable")
    rng = np.random.default_rng(config.seed)
    all_rows = np.ones(n, dtype=bool)
    all_features = np.arange(p)

    for round_no in range(config.n_trees):
        proba = _softmax(scores)
        grad = proba - onehot
        hess = np.maximum(2.0 * proba * (1.0 - proba), _MIN_HESSIAN)

        rows = all_rows
        if config.subsample < 1.0:
            size = max(1, int(round(config.subsample * n)))
            rows = np.zeros(n, dtype=bool)
            rows[rng.choice(n, size=size, replace=False)] = True

        round_trees = []
        for c in range(K):
            features = all_features
            if config.colsample < 1.0:
                size = max(1, int(round(config.colsample * p)))
                features = np.sort(rng.choice(p, size=size, replace=False))
            builder = _TreeBuilder(
                X, order, grad[:, c].copy(), hess[:, c].copy(), features, config, n_jobs
            )
            builder.build(rows.copy(), depth=0)
            tree = builder.tree()
            round_trees.append(tree)
            scores[:, c] += tree.predict(X)
        model.trees.append(round_trees)
        model.train_loss.append(_log_loss(_softmax(scores), y_index))
        logger.debug(f"第 {round_no + 1} 轮训练 log-loss {model.train_loss[-1]:.6f}")

    logger.info(
        f"提升树训练完成: {n} 样本, {p} 特征, {K} 类, "
        f"log-loss {model.train_loss[0]:.4f} -> {model.train_loss[-1]:.4f}"
    )
    return model


def gbdt_predict_proba(model: GbdtModel, X) -> np.ndarray:
    """各类别概率（softmax），每行和为 1"""
    X = _check_features(X)
    if X.shape[1] != model.n_features:
        raise ValueError(f"特征数 {X.shape[1]} 与模型特征数 {model.n_features} 不一致")
    return _softmax(model.raw_scores(X))


def proba_to_distance(proba: np.ndarray, classes) -> np.ndarray:
    """取概率最大的类别距离；并列时取较小距离"""
    classes = np.asarray(classes, dtype=np.float64)
    order = np.argsort(classes, kind="stable")
    best = np.argmax(np.asarray(proba)[:, order], axis=1)
    return classes[order][best]


def gbdt_predict_distance(model: GbdtModel, X) -> np.ndarray:
    """预测距离（米）"""
    return proba_to_distance(gbdt_predict_proba(model, X), model.classes)
