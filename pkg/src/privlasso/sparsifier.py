"""Sparse private LASSO: private support-size estimate plus top-c truncation.

A noiseless solve counts how many coefficients the nonprivate solution uses.
That count is clipped to ``[alpha, beta]``, noised with double-geometric
noise (sensitivity ``beta - alpha``), clipped again and scaled by ``rho``.
The private Frank-Wolfe output is then truncated to that many coefficients.
The whole pipeline is ``(epsilon1 + epsilon2, delta)``-private.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .core import Dataset, LogisticLoss, require_scaled
from .frank_wolfe import FwConfig, nonprivate_frank_wolfe, private_lasso
from .noise import RandomSource, double_geometric_param, sample_double_geometric

DEFAULT_NONPRIVATE_ITERATIONS = 50_000


@dataclass(frozen=True)
class SparsifierConfig:
    """Budget split and truncation settings.

    ``alpha`` and ``beta`` default to ``sqrt(p)`` and ``2 sqrt(p)``; use
    :meth:`resolve` to fill them in once ``p`` is known.
    """

    epsilon1: float = 0.05
    epsilon2: float = 0.95
    delta: float = 1e-4
    lam: float = 10.0
    iterations: int = 1000
    nonprivate_iterations: int = DEFAULT_NONPRIVATE_ITERATIONS
    rho: float = 1.0
    alpha: Optional[float] = None
    beta: Optional[float] = None
    lipschitz: float = 1.0

    def __post_init__(self):
        if not (self.epsilon1 > 0 and self.epsilon2 > 0):
            raise ValueError("epsilon1 and epsilon2 must be positive")
        if not 0 < self.delta <= 1:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.alpha is not None and self.beta is not None and not self.alpha < self.beta:
            raise ValueError(f"need alpha < beta, got alpha={self.alpha}, beta={self.beta}")

    @property
    def epsilon_total(self) -> float:
        return self.epsilon1 + self.epsilon2

    def resolve(self, p: int) -> "SparsifierConfig":
        alpha = math.sqrt(p) if self.alpha is None else self.alpha
        beta = 2 * math.sqrt(p) if self.beta is None else self.beta
        return replace(self, alpha=alpha, beta=beta)

    def private_fw(self) -> FwConfig:
        return FwConfig(lam=self.lam, iterations=self.iterations, lipschitz=self.lipschitz,
                        epsilon=self.epsilon2, delta=self.delta)

    def nonprivate_fw(self) -> FwConfig:
        return FwConfig(lam=self.lam, iterations=self.nonprivate_iterations,
                        lipschitz=self.lipschitz)


def private_support_size(w_np, cfg: SparsifierConfig, p: int, rng: RandomSource,
                         count: Optional[int] = None) -> int:
    """Privatized number of coefficients to keep.

    ``count`` overrides the nonzero count of ``w_np`` (used for the
    multinomial column mode). Returns an integer in ``[0, p]``.
    """
    cfg = cfg.resolve(p)
    alpha, beta = cfg.alpha, cfg.beta
    if not alpha < beta:
        raise ValueError(f"need alpha < beta, got alpha={alpha}, beta={beta}")
    if p < 1:
        raise ValueError("p must be at least 1")
    c = np.count_nonzero(w_np) if count is None else count
    c = float(np.clip(c, alpha, beta))
    c += int(sample_double_geometric(double_geometric_param(cfg.epsilon1, beta - alpha), rng))
    c = float(np.clip(c, alpha, beta))
    # round half to even
    return int(np.clip(np.round(c * cfg.rho), 0, p))


def top_k_indices(magnitudes, c: int) -> np.ndarray:
    """Positions of the ``c`` largest entries, lower index first on ties."""
    # stable sort on -|w| keeps ascending index order among equal magnitudes
    order = np.argsort(-np.asarray(magnitudes), kind="stable")
    return order[:c]


def keep_top_k(w, c: int) -> np.ndarray:
    """Zero all but the ``c`` largest-magnitude entries of ``w``.

    Works on vectors and, entrywise, on matrices.
    """
    w = np.asarray(w, dtype=float)
    if not 0 <= c <= w.size:
        raise ValueError(f"c must lie in [0, {w.size}], got {c}")
    flat = w.ravel()
    out = np.zeros_like(flat)
    keep = top_k_indices(np.abs(flat), c)
    out[keep] = flat[keep]
    return out.reshape(w.shape)


def sparsifier(data: Dataset, cfg: SparsifierConfig, rng: RandomSource, loss=None,
               w_nonprivate=None) -> np.ndarray:
    """Sparse private weight vector.

    Parameters
    ----------
    data : Dataset
        Scaled, binary labels.
    cfg : SparsifierConfig
    rng : RandomSource
    loss : object, optional
        Defaults to ``LogisticLoss(data)``.
    w_nonprivate : ndarray, optional
        Precomputed noiseless solution for the same ``(data, lam,
        nonprivate_iterations)``. The noiseless solver is deterministic, so
        callers running many trials can compute it once.
    """
    require_scaled(data)
    cfg = cfg.resolve(data.p)
    loss = LogisticLoss(data) if loss is None else loss
    if w_nonprivate is None:
        w_nonprivate = nonprivate_frank_wolfe(data, cfg.nonprivate_fw(), loss=loss)
    c = private_support_size(w_nonprivate, cfg, data.p, rng)
    w_private = private_lasso(data, cfg.private_fw(), rng, loss=loss)
    return keep_top_k(w_private, c)
