"""Binary logistic loss, its gradient, and curvature probes.

All functions here are pure. The design matrix is stored dense; rows are
samples, columns are features. There is no intercept term: the constrained
problem is posed over the weight vector alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

PROB_CLIP = 1e-15
SCALE_TOL = 1e-12


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus labels.

    Parameters
    ----------
    features : ndarray, shape (n, p)
    labels : ndarray, shape (n,)
        ``{0, 1}`` for binary problems, ``{0, ..., K-1}`` for multinomial.
    """

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels)
        if X.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {X.shape}")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError(f"need n >= 1 and p >= 1, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError(
                f"labels shape {y.shape} does not match {X.shape[0]} samples")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    @property
    def is_scaled(self) -> bool:
        """True when every sample satisfies ``max_j |x_ij| <= 1``."""
        return bool(np.max(np.abs(self.features)) <= 1.0 + SCALE_TOL)

    def is_binary(self) -> bool:
        return bool(np.all((self.labels == 0) | (self.labels == 1)))

    def subset(self, idx) -> "Dataset":
        return Dataset(self.features[idx], self.labels[idx])


def require_scaled(data: Dataset) -> None:
    if not data.is_scaled:
        raise ValueError(
            "dataset is not scaled: some |x_ij| > 1; call scale_features first")


def _require_binary(data: Dataset) -> None:
    if not data.is_binary():
        raise ValueError("binary cross-entropy needs labels in {0, 1}")


def _check_dim(w: np.ndarray, data: Dataset) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (data.p,):
        raise ValueError(f"weight shape {w.shape} does not match p={data.p}")
    return w


def sigmoid(u):
    """Logistic function ``1 / (1 + exp(-u))``, overflow free.

    Works elementwise on arrays; scalars in, scalar out.
    """
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    pos = u >= 0
    neg = ~pos  # NaN lands here and propagates
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    e = np.exp(u[neg])
    out[neg] = e / (1.0 + e)
    return out[()] if out.ndim == 0 else out


def bce_loss(w, data: Dataset) -> float:
    """Mean binary cross-entropy of the linear model ``w`` on ``data``."""
    w = _check_dim(w, data)
    _require_binary(data)
    prob = np.clip(sigmoid(data.features @ w), PROB_CLIP, 1.0 - PROB_CLIP)
    y = data.labels
    return float(np.mean(-y * np.log(prob) - (1 - y) * np.log1p(-prob)))


def bce_gradient(w, data: Dataset) -> np.ndarray:
    """Gradient ``(1/n) sum_i (sigmoid(w.x_i) - y_i) x_i``."""
    w = _check_dim(w, data)
    _require_binary(data)
    residual = expit(data.features @ w) - data.labels
    return data.features.T @ residual / data.n


def hessian_vector_inf_norm(w, v, data: Dataset) -> float:
    """Return ``||(1/n) X^T S X v||_inf`` with ``S = diag(s(1 - s))``.

    ``v`` must have unit L1 norm. Uses two matrix-vector products; the
    ``p x p`` Hessian is never formed.
    """
    require_scaled(data)
    w = _check_dim(w, data)
    v = np.asarray(v, dtype=float)
    if abs(np.abs(v).sum() - 1.0) > 1e-9:
        raise ValueError("v must have unit L1 norm")
    s = expit(data.features @ w)
    curv = s * (1.0 - s)
    hv = data.features.T @ (curv * (data.features @ v)) / data.n
    return float(np.max(np.abs(hv)))


class LogisticLoss:
    """Binary cross-entropy bound to a dataset.

    Exposes the ``value`` / ``gradient`` pair the Frank-Wolfe solvers call,
    plus the per-sample L1-Lipschitz constant (1 for scaled data).

    It also implements the margin interface (``margins``,
    ``gradient_at_margins``, ``column``), which lets the solvers update
    ``X w`` in O(n) after each single-coordinate step.
    """

    lipschitz = 1.0

    def __init__(self, data: Dataset):
        _require_binary(data)
        self.data = data
        self._X = data.features
        self._XT = np.ascontiguousarray(data.features.T)
        self._y = data.labels.astype(float)

    @property
    def dim(self) -> int:
        return self.data.p

    def value(self, w) -> float:
        return bce_loss(w, self.data)

    def gradient(self, w) -> np.ndarray:
        return self.gradient_at_margins(self.margins(w))

    def margins(self, w) -> np.ndarray:
        return self._X @ w

    def column(self, j: int) -> np.ndarray:
        return self._XT[j]

    def gradient_at_margins(self, z) -> np.ndarray:
        return self._XT @ (expit(z) - self._y) / self.data.n
