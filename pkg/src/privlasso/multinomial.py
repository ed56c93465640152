"""Multinomial logistic regression with row-wise L1 constraints.

Weights are a ``K x p`` matrix. Frank-Wolfe picks one L1-ball vertex per
class row each iteration, so every row stays inside ``||W_k||_1 <= lam``.
The private variant splits the budget evenly across rows: each row's
selection is ``(epsilon/K, delta/K)``-private and the matrix is
``(epsilon, delta)``-private by composition.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Optional

import numpy as np
from scipy.special import log_softmax

from .core import PROB_CLIP, Dataset, require_scaled
from .frank_wolfe import FwConfig, vertex_scores
from .noise import RandomSource, sample_laplace
from .sparsifier import SparsifierConfig, keep_top_k, private_support_size, top_k_indices

MULTINOMIAL_LIPSCHITZ = 2.0


def softmax(z) -> np.ndarray:
    """Softmax over the last axis, stabilized by subtracting the max."""
    z = np.asarray(z, dtype=float)
    e = np.exp(z - np.max(z, axis=-1, keepdims=True))
    return e / np.sum(e, axis=-1, keepdims=True)


def _check(W, data: Dataset, classes: Optional[int] = None):
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[1] != data.p:
        raise ValueError(f"weight shape {W.shape} does not match p={data.p}")
    K = W.shape[0] if classes is None else classes
    y = data.labels
    if np.any(y < 0) or np.any(y >= K) or np.any(y != np.round(y)):
        raise ValueError(f"labels must be integers in [0, {K - 1}]")
    return W, y.astype(np.int64)


def multinomial_loss(W, data: Dataset) -> float:
    """Mean cross-entropy of ``softmax(W x_i)`` against class labels."""
    W, y = _check(W, data)
    logp = log_softmax(data.features @ W.T, axis=1)
    picked = logp[np.arange(data.n), y]
    return float(np.mean(-np.maximum(picked, math.log(PROB_CLIP))))


def multinomial_gradient(W, data: Dataset) -> np.ndarray:
    """Gradient as a ``K x p`` matrix: row ``k`` is ``mean_i (p_ik - y_ik) x_i``."""
    W, y = _check(W, data)
    return _gradient(W, data.features, y)


def _gradient(W, X, y):
    resid = softmax(X @ W.T)
    resid[np.arange(len(y)), y] -= 1.0
    return resid.T @ X / len(y)


def predict_classes(W, features) -> np.ndarray:
    return np.argmax(np.asarray(features) @ np.asarray(W).T, axis=1)


class MultinomialLoss:
    """Cross-entropy bound to a dataset; L1-Lipschitz constant 2."""

    lipschitz = MULTINOMIAL_LIPSCHITZ

    def __init__(self, data: Dataset, classes: int):
        if classes < 2:
            raise ValueError("need at least two classes")
        _check(np.zeros((classes, data.p)), data, classes)
        self.data = data
        self.classes = classes
        self._y = data.labels.astype(np.int64)

    @property
    def shape(self):
        return self.classes, self.data.p

    def value(self, W) -> float:
        return multinomial_loss(W, self.data)

    def gradient(self, W) -> np.ndarray:
        return _gradient(W, self.data.features, self._y)


def multinomial_noise_scale(cfg: FwConfig, n: int, classes: int) -> float:
    """``lam L sqrt(8 T log(K/delta)) / (n epsilon / K)``."""
    cfg.check_private()
    return (cfg.lam * cfg.lipschitz * math.sqrt(8 * cfg.iterations * math.log(classes / cfg.delta))
            / (n * cfg.epsilon / classes))


def _run(loss: MultinomialLoss, lam, iterations, noise, callback):
    K, p = loss.shape
    W = np.zeros((K, p))
    rows = np.arange(K)
    for t in range(1, iterations):
        scores = vertex_scores(loss.gradient(W), lam)
        if noise is not None:
            scores = scores + noise((K, 2 * p))
        idx = np.argmin(scores, axis=1)
        mu = 2.0 / (t + 2)
        W *= 1.0 - mu
        W[rows, idx % p] += mu * np.where(idx < p, lam, -lam)
        if callback is not None:
            callback(t, W)
    return W


def multinomial_frank_wolfe(data: Dataset, cfg: FwConfig, classes: int, callback=None) -> np.ndarray:
    """Noiseless row-wise Frank-Wolfe; the multinomial counterpart of the binary solver."""
    require_scaled(data)
    return _run(MultinomialLoss(data, classes), cfg.lam, cfg.iterations, None, callback)


def multinomial_private_lasso(data: Dataset, cfg: FwConfig, classes: int, rng: RandomSource,
                              callback=None) -> np.ndarray:
    """Private row-wise Frank-Wolfe for ``classes``-way logistic regression.

    ``cfg.lipschitz`` should be 2 for the cross-entropy loss on scaled data.
    Every row's ``2p`` scores receive independent Laplace noise of scale
    :func:`multinomial_noise_scale`.
    """
    if classes < 2:
        raise ValueError("need at least two classes")
    cfg.check_private()
    require_scaled(data)
    scale = multinomial_noise_scale(cfg, data.n, classes)
    return _run(MultinomialLoss(data, classes), cfg.lam, cfg.iterations,
                lambda size: sample_laplace(scale, rng, size), callback)


def keep_top_columns(W, c: int) -> np.ndarray:
    """Keep the ``c`` feature columns with the largest L1 mass."""
    W = np.asarray(W, dtype=float)
    if not 0 <= c <= W.shape[1]:
        raise ValueError(f"c must lie in [0, {W.shape[1]}], got {c}")
    out = np.zeros_like(W)
    keep = top_k_indices(np.abs(W).sum(axis=0), c)
    out[:, keep] = W[:, keep]
    return out


def multinomial_sparsifier(data: Dataset, cfg: SparsifierConfig, classes: int, rng: RandomSource,
                           count: str = "entries", w_nonprivate=None) -> np.ndarray:
    """Sparsified private multinomial weights.

    ``count="entries"`` truncates to the ``c`` largest matrix entries, with
    ``c`` derived from the nonprivate nonzero-entry count and clipped to
    ``K p``. ``count="columns"`` counts and keeps whole feature columns.
    ``cfg.alpha``/``cfg.beta`` default to ``sqrt(m)``/``2 sqrt(m)`` where
    ``m`` is ``K p`` or ``p`` accordingly. The Lipschitz constant is
    always 2 here, whatever ``cfg.lipschitz`` says.
    """
    require_scaled(data)
    if count not in ("entries", "columns"):
        raise ValueError("count must be 'entries' or 'columns'")
    size = classes * data.p if count == "entries" else data.p
    cfg = replace(cfg.resolve(size), lipschitz=MULTINOMIAL_LIPSCHITZ)
    if w_nonprivate is None:
        w_nonprivate = multinomial_frank_wolfe(data, cfg.nonprivate_fw(), classes)
    if count == "entries":
        c0 = np.count_nonzero(w_nonprivate)
    else:
        c0 = np.count_nonzero(np.any(w_nonprivate != 0, axis=0))
    c = private_support_size(w_nonprivate, cfg, size, rng, count=c0)
    w_private = multinomial_private_lasso(data, cfg.private_fw(), classes, rng)
    return keep_top_k(w_private, c) if count == "entries" else keep_top_columns(w_private, c)
