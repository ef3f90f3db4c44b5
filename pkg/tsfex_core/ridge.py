"""
岭回归分类器
目标编码为 {−1, +1} 后按回归求闭式解；alpha 由留一法（LOO）误差在对数网格上选取
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

logger = logging.getLogger(__name__)

DEFAULT_ALPHAS = np.logspace(-3, 3, 13)


@dataclass
class RidgeModel:
    """线性模型 score = X·w + b"""

    weights: np.ndarray
    intercept: float
    alpha: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha 不能为负: {self.alpha}")
        self.weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("岭回归权重包含非有限值")

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(self.weights):
            raise ValueError(f"特征数与模型不一致: 期望 {len(self.weights)}")
        return X @ self.weights + self.intercept


def _solve(X: np.ndarray, Y: np.ndarray, alpha: float) -> np.ndarray:
    gram = X.T @ X + alpha * np.eye(X.shape[1])
    try:
        return linalg.solve(gram, X.T @ Y, assume_a="sym")
    except linalg.LinAlgError as e:
        raise ValueError(f"正规方程奇异 (alpha={alpha}): {e}") from None


def ridge_train(X, y, alpha: float, fit_intercept: bool = True) -> RidgeModel:
    """
    闭式岭回归：min ‖Xw + b − y‖² + α‖w‖²（截距不受惩罚）

    Args:
        X: n × p 特征
        y: 目标（通常为 ±1）
        alpha: 正则化强度（0 时要求设计矩阵满秩）
        fit_intercept: 是否拟合截距（通过中心化实现）
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if len(X) < 1:
        raise ValueError("岭回归至少需要 1 个样本")
    if alpha < 0:
        raise ValueError(f"alpha 不能为负: {alpha}")
    if fit_intercept:
        x_mean = X.mean(axis=0)
        y_mean = y.mean()
        w = _solve(X - x_mean, y - y_mean, alpha)
        return RidgeModel(w, float(y_mean - x_mean @ w), alpha)
    return RidgeModel(_solve(X, y, alpha), 0.0, alpha)


def ridge_predict(model: RidgeModel, X) -> np.ndarray:
    """按得分符号分类，得分为 0 时取 +1"""
    return np.where(model.decision_function(X) >= 0, 1, -1)


def loo_errors(X, Y, alphas=DEFAULT_ALPHAS) -> np.ndarray:
    """
    各 alpha 的留一法均方误差

    利用 SVD 帽子矩阵恒等式 e_loo = (y − ŷ) / (1 − H_ii)，中心化处理截距

    Returns:
        长度为 len(alphas) 的误差数组（多目标时对各目标求和）
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    n = len(X)
    if n < 2:
        raise ValueError("留一法至少需要 2 个样本")
    Xc = X - X.mean(axis=0)
    y_mean = Y.mean(axis=0)
    U, s, _ = linalg.svd(Xc, full_matrices=False)
    UtY = U.T @ (Y - y_mean)
    s2 = s**2
    errors = []
    for alpha in alphas:
        shrink = s2 / (s2 + alpha) if alpha > 0 else (s2 > 1e-12).astype(np.float64)
        fitted = y_mean + U @ (shrink[:, None] * UtY)
        leverage = np.sum(U**2 * shrink[None, :], axis=1) + 1.0 / n
        denom = np.maximum(1.0 - leverage, 1e-12)
        resid = (Y - fitted) / denom[:, None]
        errors.append(float(np.mean(np.sum(resid**2, axis=1))))
    return np.asarray(errors)


def select_alpha_loo(X, Y, alphas=DEFAULT_ALPHAS) -> float:
    """LOO 误差最小的 alpha；并列时取较小值"""
    alphas = np.asarray(alphas, dtype=np.float64)
    errors = loo_errors(X, Y, alphas)
    best = float(alphas[int(np.argmin(errors))])
    logger.debug(f"LOO 误差 {dict(zip(alphas.tolist(), errors.tolist()))}, 选择 alpha={best}")
    return best


class RidgeClassifier:
    """
    多类别岭分类器（一对其余）

    每个类别以 ±1 为目标共享同一 alpha；预测取得分最大的类别，并列时取较小距离
    """

    def __init__(self, alphas=DEFAULT_ALPHAS, standardize: bool = True):
        self.alphas = np.asarray(alphas, dtype=np.float64)
        self.standardize = standardize
        self.classes: np.ndarray | None = None
        self.alpha: float | None = None
        self.mean: np.ndarray | None = None
        self.scale: np.ndarray | None = None
        self.models: list[RidgeModel] = []

    def _transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if not self.standardize:
            return X
        return (X - self.mean) / self.scale

    def fit(self, X, y) -> "RidgeClassifier":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        self.classes = np.unique(y)
        self.mean = X.mean(axis=0)
        sd = X.std(axis=0)
        self.scale = np.where(sd > 1e-12, sd, 1.0)
        Xs = self._transform(X)
        targets = np.where(y[:, None] == self.classes[None, :], 1.0, -1.0)
        if len(self.classes) == 2:
            targets = targets[:, 1:]
        self.alpha = select_alpha_loo(Xs, targets, self.alphas) if len(X) > 1 else 1.0
        self.models = [ridge_train(Xs, t, self.alpha) for t in targets.T]
        logger.info(f"岭分类器训练完成: {len(self.classes)} 类, alpha={self.alpha:g}")
        return self

    def decision_function(self, X) -> np.ndarray:
        if self.classes is None:
            raise RuntimeError("RidgeClassifier 尚未 fit")
        Xs = self._transform(X)
        return np.column_stack([m.decision_function(Xs) for m in self.models])

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        if len(self.classes) == 1:
            return np.full(len(scores), self.classes[0])
        if len(self.classes) == 2:
            return np.where(scores[:, 0] > 0, self.classes[1], self.classes[0])
        return self.classes[np.argmax(scores, axis=1)]

    def get_state(self) -> dict:
        return {
            "classes": np.asarray(self.classes, dtype="<f8"),
            "alpha": self.alpha,
            "standardize": self.standardize,
            "mean": np.asarray(self.mean, dtype="<f8"),
            "scale": np.asarray(self.scale, dtype="<f8"),
            "weights": np.vstack([m.weights for m in self.models]).astype("<f8"),
            "intercepts": np.array([m.intercept for m in self.models], dtype="<f8"),
        }

    @classmethod
    def from_state(cls, state: dict) -> "RidgeClassifier":
        clf = cls(standardize=bool(state["standardize"]))
        clf.classes = np.asarray(state["classes"], dtype=np.float64)
        clf.alpha = float(state["alpha"])
        clf.mean = np.asarray(state["mean"], dtype=np.float64)
        clf.scale = np.asarray(state["scale"], dtype=np.float64)
        clf.models = [
            RidgeModel(w, float(b), clf.alpha)
            for w, b in zip(np.asarray(state["weights"]), state["intercepts"])
        ]
        return clf
