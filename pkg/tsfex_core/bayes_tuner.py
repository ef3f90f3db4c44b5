"""
贝叶斯超参数优化
高斯过程代理模型（平方指数核）+ 期望改进（EI）采集函数，目标最小化
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import pandas as pd
from scipy import linalg, stats
from scipy.stats import qmc

logger = logging.getLogger(__name__)

LENGTH_SCALE_GRID = (0.05, 0.1, 0.2, 0.5, 1.0)
SIGNAL_VAR_GRID = (0.5, 1.0, 2.0)
NOISE_VAR_GRID = (1e-6, 1e-4, 1e-2)
JITTER_LADDER = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4)


@dataclass(frozen=True)
class Param:
    """单个超参数的搜索范围"""

    name: str
    lower: float
    upper: float
    scale: str = "linear"
    integer: bool = False

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"{self.name}: lower({self.lower}) 必须小于 upper({self.upper})")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"{self.name}: 未知尺度 {self.scale}")
        if self.scale == "log" and self.lower <= 0:
            raise ValueError(f"{self.name}: 对数尺度要求 lower > 0")

    def from_unit(self, u: float) -> float | int:
        u = min(max(float(u), 0.0), 1.0)
        if self.scale == "log":
            lo, hi = math.log(self.lower), math.log(self.upper)
            value = math.exp(lo + u * (hi - lo))
        else:
            value = self.lower + u * (self.upper - self.lower)
        value = min(max(value, self.lower), self.upper)
        return int(round(value)) if self.integer else value

    def to_unit(self, value: float) -> float:
        if self.scale == "log":
            lo, hi = math.log(self.lower), math.log(self.upper)
            u = (math.log(value) - lo) / (hi - lo)
        else:
            u = (value - self.lower) / (self.upper - self.lower)
        return min(max(u, 0.0), 1.0)


@dataclass(frozen=True)
class SearchSpace:
    params: tuple[Param, ...]

    @property
    def dim(self) -> int:
        return len(self.params)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    def denormalize(self, unit) -> dict:
        return {p.name: p.from_unit(u) for p, u in zip(self.params, unit)}

    def normalize(self, config: dict) -> np.ndarray:
        return np.array([p.to_unit(config[p.name]) for p in self.params])

    def project(self, unit) -> np.ndarray:
        """取整后对应的单位立方体点"""
        return self.normalize(self.denormalize(unit))


# 提升树默认搜索空间
GBDT_SEARCH_SPACE = SearchSpace(
    (
        Param("n_trees", 50, 500, scale="log", integer=True),
        Param("max_depth", 2, 8, integer=True),
        Param("learning_rate", 0.01, 0.3, scale="log"),
        Param("l2_lambda", 0.1, 10.0, scale="log"),
        Param("subsample", 0.5, 1.0),
        Param("colsample", 0.5, 1.0),
    )
)


@dataclass
class Trial:
    index: int
    unit: np.ndarray
    params: dict
    objective: float


@dataclass
class TuneResult:
    best: Trial
    history: list[Trial] = field(default_factory=list)

    def history_frame(self) -> pd.DataFrame:
        """试验历史：trial, 各参数, objective"""
        rows = [{"trial": t.index, **t.params, "objective": t.objective} for t in self.history]
        return pd.DataFrame(rows)


@dataclass(frozen=True)
class GpHyper:
    length_scale: float
    signal_var: float
    noise_var: float


def _se_kernel(A: np.ndarray, B: np.ndarray, hyper: GpHyper) -> np.ndarray:
    d2 = np.sum((A[:, None, :] - B[None, :, :]) ** 2, axis=2)
    return hyper.signal_var * np.exp(-0.5 * d2 / hyper.length_scale**2)


def _cholesky(K: np.ndarray) -> tuple[np.ndarray, float]:
    for jitter in JITTER_LADDER:
        try:
            return linalg.cholesky(K + jitter * np.eye(len(K)), lower=True), jitter
        except linalg.LinAlgError:
            continue
    raise ValueError(f"协方差矩阵病态，加入 {JITTER_LADDER[-1]} 抖动后仍无法分解")


def gp_posterior(
    X_obs, y_obs, X_query, hyper: GpHyper, prior_mean: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """
    GP 回归后验

    Args:
        X_obs: m × d 观测点
        y_obs: 观测值
        X_query: q × d 查询点
        hyper: 核超参数（noise_var >= 1e-8）
        prior_mean: 先验均值

    Returns:
        (后验均值, 后验方差)，方差非负
    """
    X_obs = np.atleast_2d(np.asarray(X_obs, dtype=np.float64))
    X_query = np.atleast_2d(np.asarray(X_query, dtype=np.float64))
    y = np.asarray(y_obs, dtype=np.float64).reshape(-1) - prior_mean
    if len(X_obs) < 1:
        raise ValueError("GP 至少需要 1 个观测")
    if hyper.noise_var < 1e-8:
        raise ValueError(f"噪声方差必须 >= 1e-8: {hyper.noise_var}")

    K = _se_kernel(X_obs, X_obs, hyper) + hyper.noise_var * np.eye(len(X_obs))
    L, _ = _cholesky(K)
    alpha = linalg.cho_solve((L, True), y)
    Ks = _se_kernel(X_query, X_obs, hyper)
    mean = prior_mean + Ks @ alpha
    v = linalg.solve_triangular(L, Ks.T, lower=True)
    var = hyper.signal_var - np.sum(v * v, axis=0)
    return mean, np.maximum(var, 0.0)


def log_marginal_likelihood(X_obs, y_obs, hyper: GpHyper) -> float:
    X_obs = np.atleast_2d(np.asarray(X_obs, dtype=np.float64))
    y = np.asarray(y_obs, dtype=np.float64).reshape(-1)
    K = _se_kernel(X_obs, X_obs, hyper) + hyper.noise_var * np.eye(len(X_obs))
    L, _ = _cholesky(K)
    alpha = linalg.cho_solve((L, True), y)
    return float(
        -0.5 * y @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * len(y) * math.log(2 * math.pi)
    )


def fit_hyper(X_obs, y_obs) -> GpHyper:
    """在小网格上最大化边际似然选取核超参数"""
    best, best_ll = None, -np.inf
    for ls, sv, nv in itertools.product(LENGTH_SCALE_GRID, SIGNAL_VAR_GRID, NOISE_VAR_GRID):
        hyper = GpHyper(ls, sv, nv)
        try:
            ll = log_marginal_likelihood(X_obs, y_obs, hyper)
        except ValueError:
            continue
        if ll > best_ll:
            best, best_ll = hyper, ll
    if best is None:
        raise ValueError("所有核超参数组合均无法分解协方差矩阵")
    return best


def expected_improvement(mean, sd, best_so_far: float) -> np.ndarray:
    """
    最小化形式的期望改进

    EI = (best − μ)Φ(z) + σφ(z)，z = (best − μ)/σ；σ = 0 处为 0
    """
    mean = np.asarray(mean, dtype=np.float64)
    sd = np.asarray(sd, dtype=np.float64)
    improvement = best_so_far - mean
    safe_sd = np.where(sd > 0, sd, 1.0)
    z = improvement / safe_sd
    ei = improvement * stats.norm.cdf(z) + safe_sd * stats.norm.pdf(z)
    return np.where(sd > 0, np.maximum(ei, 0.0), 0.0)


def _evaluate(objective: Callable[[dict], float], params: dict, index: int) -> float:
    try:
        value = float(objective(params))
    except Exception as e:
        logger.warning(f"第 {index} 次试验目标函数失败，记为 +inf: {e}")
        return math.inf
    if not math.isfinite(value):
        logger.warning(f"第 {index} 次试验目标值非有限 ({value})，记为 +inf")
        return math.inf
    return value


def tune(
    objective: Callable[[dict], float],
    space: SearchSpace,
    budget: int = 40,
    n_init: int = 5,
    seed: int = 0,
    initial_configs: list[dict] | None = None,
    n_candidates: int = 1024,
) -> TuneResult:
    """
    GP-EI 序贯优化

    先评估显式给定的初始配置与 Halton 准随机点共 n_init 个，之后每轮在 GP 后验上
    从 n_candidates 个随机候选点中选 EI 最大者

    Args:
        objective: 配置字典 -> 目标值（越小越好）
        space: 搜索空间
        budget: 总评估次数
        n_init: 初始设计点数
        seed: 随机种子
        initial_configs: 原样评估的初始配置（计入 n_init）
        n_candidates: 每轮候选池大小

    Returns:
        TuneResult（最优试验 + 完整历史）
    """
    if n_init < 2 or budget < n_init:
        raise ValueError(f"需要 budget >= n_init >= 2，实际 budget={budget}, n_init={n_init}")

    rng = np.random.default_rng(seed)
    starts = [space.normalize(c) for c in (initial_configs or [])][:n_init]
    n_halton = n_init - len(starts)
    if n_halton > 0:
        halton = qmc.Halton(d=space.dim, scramble=True, seed=seed)
        starts.extend(halton.random(n_halton))

    history: list[Trial] = []

    def run(unit: np.ndarray) -> None:
        point = space.project(unit)
        params = space.denormalize(point)
        value = _evaluate(objective, params, len(history))
        history.append(Trial(len(history), point, params, value))
        logger.debug(f"试验 {len(history) - 1}: {params} -> {value:.6g}")

    for unit in starts:
        run(np.asarray(unit, dtype=np.float64))

    while len(history) < budget:
        finite = [t for t in history if math.isfinite(t.objective)]
        pool = rng.random((n_candidates, space.dim))
        if not finite:
            run(pool[0])
            continue
        X = np.vstack([t.unit for t in finite])
        y = np.array([t.objective for t in finite])
        mu, sd = y.mean(), y.std()
        ys = (y - mu) / sd if sd > 0 else y - mu
        hyper = fit_hyper(X, ys)
        mean, var = gp_posterior(X, ys, pool, hyper)
        ei = expected_improvement(mean, np.sqrt(var), float(ys.min()))
        run(pool[int(np.argmax(ei))])

    best = min(history, key=lambda t: (t.objective, t.index))
    logger.info(f"调参完成: {len(history)} 次试验, 最优目标 {best.objective:.6g}, 参数 {best.params}")
    return TuneResult(best=best, history=history)
