"""
时序聚类模块
K-Shape（形状距离 SBD）与 K-Means（欧氏 / 可选 DTW），以及惯性（簇内平方距离和）
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from tsfex_core.series import dtw_distance, znormalize

logger = logging.getLogger(__name__)

METHODS = ("kshape", "kmeans")
METRICS = ("euclidean", "dtw")


@dataclass(frozen=True)
class ClusterModel:
    """聚类结果（fit 后不可变）"""

    method: str
    k: int
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    seed: int
    metric: str = "euclidean"
    sbd_inertia: float | None = None
    n_iter: int = 0
    inertia_history: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"未知聚类方法: {self.method}")
        if self.metric not in METRICS:
            raise ValueError(f"未知距离度量: {self.metric}")

    @property
    def series_length(self) -> int:
        return int(self.centroids.shape[1])

    def get_state(self) -> dict:
        return {
            "method": self.method,
            "k": self.k,
            "seed": self.seed,
            "metric": self.metric,
            "inertia": self.inertia,
            "sbd_inertia": self.sbd_inertia,
            "n_iter": self.n_iter,
            "inertia_history": list(self.inertia_history),
            "centroids": np.asarray(self.centroids, dtype="<f8"),
            "assignments": np.asarray(self.assignments, dtype="<i8"),
        }

    @classmethod
    def from_state(cls, state: dict) -> "ClusterModel":
        return cls(
            method=state["method"],
            k=int(state["k"]),
            centroids=np.asarray(state["centroids"], dtype=np.float64),
            assignments=np.asarray(state["assignments"], dtype=np.int64),
            inertia=float(state["inertia"]),
            seed=int(state["seed"]),
            metric=state["metric"],
            sbd_inertia=None if state["sbd_inertia"] is None else float(state["sbd_inertia"]),
            n_iter=int(state["n_iter"]),
            inertia_history=[float(v) for v in state["inertia_history"]],
        )


def _as_matrix(data) -> np.ndarray:
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"聚类输入必须为等长序列矩阵，实际维度为 {X.ndim}")
    return X


def inertia(data, centroids, assignments) -> float:
    """
    簇内平方距离和 Σ_i ‖x_i − μ_{c(i)}‖²

    Args:
        data: n × L 序列矩阵
        centroids: k × L 质心
        assignments: 长度 n 的簇编号
    """
    X = _as_matrix(data)
    C = _as_matrix(centroids)
    if X.shape[1] != C.shape[1]:
        raise ValueError(f"序列长度 {X.shape[1]} 与质心长度 {C.shape[1]} 不一致")
    labels = np.asarray(assignments, dtype=np.int64)
    if len(labels) != len(X):
        raise ValueError(f"分配数量 {len(labels)} 与序列数量 {len(X)} 不一致")
    diff = X - C[labels]
    return float(np.sum(diff * diff))


def _cross_correlation(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """循环互相关 cc[s] = Σ_t x[t]·y[t−s]"""
    return np.fft.irfft(np.fft.rfft(x) * np.conj(np.fft.rfft(y)), n=len(x))


def sbd(x, y) -> float:
    """
    形状距离 SBD = 1 − max_s NCC(x, y, s)

    任一输入能量为 0 时距离记为 1
    """
    a = np.asarray(x, dtype=np.float64).reshape(-1)
    b = np.asarray(y, dtype=np.float64).reshape(-1)
    if len(a) != len(b):
        raise ValueError(f"SBD 输入长度不一致: {len(a)} != {len(b)}")
    norm = np.linalg.norm(a) * np.linalg.norm(b)
    if norm == 0:
        return 1.0
    ncc = _cross_correlation(a, b).max() / norm
    return float(np.clip(1.0 - ncc, 0.0, 2.0))


def _sbd_to_centroids(Z: np.ndarray, C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    每条序列到每个质心的 SBD 及对齐位移

    Returns:
        (n × k 距离, n × k 位移)；np.roll(z_i, shift) 与质心对齐
    """
    n, L = Z.shape
    dists = np.ones((n, len(C)))
    shifts = np.zeros((n, len(C)), dtype=np.int64)
    fz = np.fft.rfft(Z, axis=1)
    z_norms = np.linalg.norm(Z, axis=1)
    for j, c in enumerate(C):
        c_norm = np.linalg.norm(c)
        cc = np.fft.irfft(np.fft.rfft(c)[None, :] * np.conj(fz), n=L, axis=1)
        best = cc.argmax(axis=1)
        shifts[:, j] = best
        denom = z_norms * c_norm
        valid = denom > 0
        ncc = cc[np.arange(n), best]
        dists[valid, j] = np.clip(1.0 - ncc[valid] / denom[valid], 0.0, 2.0)
    return dists, shifts


def _repair_empty(labels: np.ndarray, dists: np.ndarray, k: int) -> list[int]:
    """
    空簇修复：把离自身质心最远的点移入空簇

    Returns:
        被修复的簇编号
    """
    repaired = []
    own = dists[np.arange(len(labels)), labels].copy()
    for c in range(k):
        if np.any(labels == c):
            continue
        counts = np.bincount(labels, minlength=k)
        movable = counts[labels] > 1
        candidates = np.where(movable, own, -np.inf)
        far = int(np.argmax(candidates))
        labels[far] = c
        own[far] = -np.inf
        repaired.append(c)
    if repaired:
        logger.warning(f"空簇 {repaired} 已由最远点重新播种")
    return repaired


def _shape_extraction(members: np.ndarray, centroid: np.ndarray) -> np.ndarray:
    """对齐后成员散度矩阵的主特征向量，符号取与成员相关性之和为正，再 z 标准化"""
    L = members.shape[1]
    if np.linalg.norm(centroid) > 0:
        _, shifts = _sbd_to_centroids(members, centroid[None, :])
        aligned = np.stack([np.roll(m, s) for m, s in zip(members, shifts[:, 0])])
    else:
        aligned = members
    S = aligned.T @ aligned
    Q = np.eye(L) - np.full((L, L), 1.0 / L)
    _, vectors = np.linalg.eigh(Q @ S @ Q)
    shape = vectors[:, -1]
    if np.sum(aligned @ shape) < 0:
        shape = -shape
    return znormalize(shape)


def _check_k(n: int, k: int) -> None:
    if k < 1:
        raise ValueError(f"k 必须 >= 1: {k}")
    if k > n:
        raise ValueError(f"k={k} 大于序列数量 {n}")


def kshape_fit(series, k: int, seed: int = 0, max_iter: int = 100) -> ClusterModel:
    """
    K-Shape 聚类

    输入逐行 z 标准化；初始质心为 k 条不同的随机成员；每轮先提取形状再按 SBD 重新分配，
    分配不再变化或达到 max_iter 时停止

    Args:
        series: n × L 等长序列
        k: 簇数
        seed: 随机种子
        max_iter: 最大迭代次数

    Returns:
        ClusterModel（inertia 为标准化数据上的欧氏惯性，sbd_inertia 为 SBD 之和）
    """
    X = _as_matrix(series)
    n = len(X)
    _check_k(n, k)
    Z = np.vstack([znormalize(row) for row in X])
    rng = np.random.default_rng(seed)
    centroids = Z[np.sort(rng.choice(n, size=k, replace=False))].copy()

    dists, _ = _sbd_to_centroids(Z, centroids)
    labels = dists.argmin(axis=1)
    _repair_empty(labels, dists, k)

    n_iter = 0
    history = []
    for n_iter in range(1, max_iter + 1):
        centroids = np.vstack(
            [_shape_extraction(Z[labels == c], centroids[c]) for c in range(k)]
        )
        dists, _ = _sbd_to_centroids(Z, centroids)
        new_labels = dists.argmin(axis=1)
        _repair_empty(new_labels, dists, k)
        history.append(inertia(Z, centroids, new_labels))
        logger.debug(f"K-Shape 第 {n_iter} 轮, 惯性 {history[-1]:.4f}")
        converged = np.array_equal(new_labels, labels)
        labels = new_labels
        if converged:
            break

    sbd_total = float(dists[np.arange(n), labels].sum())
    model = ClusterModel(
        method="kshape",
        k=k,
        centroids=centroids,
        assignments=labels.astype(np.int64),
        inertia=inertia(Z, centroids, labels),
        seed=seed,
        sbd_inertia=sbd_total,
        n_iter=n_iter,
        inertia_history=history,
    )
    logger.info(f"K-Shape 完成: k={k}, 迭代 {n_iter} 轮, SBD 和 {sbd_total:.4f}")
    return model


def _dtw_row(x: np.ndarray, C: np.ndarray) -> list[float]:
    return [dtw_distance(x, c) for c in C]


def _pairwise(X: np.ndarray, C: np.ndarray, metric: str, n_jobs: int = 1) -> np.ndarray:
    if metric == "euclidean":
        diff = X[:, None, :] - C[None, :, :]
        return np.sum(diff * diff, axis=2)
    rows = Parallel(n_jobs=n_jobs, prefer="threads")(delayed(_dtw_row)(x, C) for x in X)
    return np.asarray(rows, dtype=np.float64)


def _kmeans_plus_plus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(X)
    chosen = [int(rng.integers(n))]
    closest = np.sum((X - X[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            remaining = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(remaining))
        chosen.append(nxt)
        closest = np.minimum(closest, np.sum((X - X[nxt]) ** 2, axis=1))
    return X[chosen].copy()


def kmeans_fit(
    series,
    k: int,
    seed: int = 0,
    max_iter: int = 100,
    metric: str = "euclidean",
    n_jobs: int = 1,
) -> ClusterModel:
    """
    K-Means（Lloyd 迭代，k-means++ 初始化）

    每次分配后记录一次惯性；分配不再变化时停止。metric="dtw" 时分配步使用 DTW 距离

    Args:
        series: n × L 等长序列
        k: 簇数
        seed: 随机种子
        max_iter: 最大迭代次数
        metric: euclidean | dtw
        n_jobs: DTW 距离计算的并行线程数
    """
    X = _as_matrix(series)
    n = len(X)
    _check_k(n, k)
    if metric not in METRICS:
        raise ValueError(f"未知距离度量: {metric}")
    rng = np.random.default_rng(seed)
    centroids = _kmeans_plus_plus(X, k, rng)

    labels = None
    history = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        dists = _pairwise(X, centroids, metric, n_jobs)
        new_labels = dists.argmin(axis=1)
        for c in _repair_empty(new_labels, dists, k):
            centroids[c] = X[new_labels == c][0]
        history.append(inertia(X, centroids, new_labels))
        logger.debug(f"K-Means 第 {n_iter} 轮, 惯性 {history[-1]:.4f}")
        converged = labels is not None and np.array_equal(new_labels, labels)
        labels = new_labels
        if converged or n_iter == max_iter:
            break
        centroids = np.vstack([X[labels == c].mean(axis=0) for c in range(k)])

    model = ClusterModel(
        method="kmeans",
        k=k,
        centroids=centroids,
        assignments=labels.astype(np.int64),
        inertia=history[-1],
        seed=seed,
        metric=metric,
        n_iter=n_iter,
        inertia_history=history,
    )
    logger.info(f"K-Means 完成: k={k}, 迭代 {n_iter} 轮, 惯性 {model.inertia:.4f}")
    return model


def assign(model: ClusterModel, series, n_jobs: int = 1) -> np.ndarray:
    """
    将新序列分配到最近的质心（K-Shape 用 SBD，K-Means 用模型的距离度量）

    Returns:
        簇编号数组，取值 [0, k)
    """
    X = _as_matrix(series)
    if X.shape[1] != model.series_length:
        raise ValueError(f"序列长度 {X.shape[1]} 与质心长度 {model.series_length} 不一致")
    if model.method == "kshape":
        Z = np.vstack([znormalize(row) for row in X])
        dists, _ = _sbd_to_centroids(Z, model.centroids)
    else:
        dists = _pairwise(X, model.centroids, model.metric, n_jobs)
    return dists.argmin(axis=1).astype(np.int64)
