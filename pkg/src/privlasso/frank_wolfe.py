"""Frank-Wolfe over the L1 ball, with and without Laplace-noised vertex selection.

The feasible set is ``{w : ||w||_1 <= lam}``. Its ``2p`` vertices are laid
out as ``(+lam e_1, ..., +lam e_p, -lam e_1, ..., -lam e_p)``; that order is
what vertex indices refer to throughout. Both solvers start from zero and run
``T - 1`` updates with step ``2 / (t + 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import Dataset, LogisticLoss, require_scaled
from .noise import RandomSource, sample_laplace


@dataclass(frozen=True)
class FwConfig:
    """Solver settings.

    ``epsilon`` and ``delta`` are only consulted by the private solver.
    """

    lam: float
    iterations: int
    lipschitz: float = 1.0
    epsilon: Optional[float] = None
    delta: Optional[float] = None

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ValueError(f"iterations must be a positive integer, got {self.iterations}")
        if not self.lipschitz > 0:
            raise ValueError("lipschitz constant must be positive")

    def check_private(self):
        if self.epsilon is None or not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.delta is None or not 0 < self.delta <= 1:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")


def vertex_scores(gradient, lam: float) -> np.ndarray:
    """Inner products of every L1-ball vertex with ``gradient``."""
    g = np.asarray(gradient, dtype=float)
    return np.concatenate((lam * g, -lam * g), axis=-1)


def select_vertex(scores) -> int:
    """Index of the lowest score; the first one wins ties."""
    return int(np.argmin(scores))


def vertex_vector(index: int, p: int, lam: float) -> np.ndarray:
    """Dense form of vertex ``index``."""
    if not 0 <= index < 2 * p:
        raise IndexError(f"vertex index {index} out of range for p={p}")
    s = np.zeros(p)
    s[index % p] = lam if index < p else -lam
    return s


def laplace_noise_scale(cfg: FwConfig, n: int) -> float:
    """Per-score Laplace scale ``lam L sqrt(8 T log(1/delta)) / (n eps)``."""
    cfg.check_private()
    return (cfg.lam * cfg.lipschitz * math.sqrt(8 * cfg.iterations * math.log(1.0 / cfg.delta))
            / (n * cfg.epsilon))


def suggested_iterations(n: int, epsilon: float, lam: float, lipschitz: float = 1.0) -> int:
    """Iteration count balancing noise against optimization error.

    Uses the curvature bound ``lam**2 / 4`` of the logistic loss on scaled
    data, giving ``T = curv^(2/3) (n eps)^(2/3) / (L lam)^(2/3)``.
    """
    curvature = lam ** 2 / 4.0
    t = (curvature * n * epsilon / (lipschitz * lam)) ** (2.0 / 3.0)
    return max(1, int(round(t)))


def duality_gap(w, gradient, lam: float) -> float:
    """Frank-Wolfe gap ``<w, g> + lam ||g||_inf``; bounds the suboptimality."""
    g = np.asarray(gradient, dtype=float)
    return float(np.dot(w, g) + lam * np.max(np.abs(g)))


def _run(loss, lam, iterations, noise: Optional[Callable[[int], np.ndarray]], callback):
    p = loss.dim
    w = np.zeros(p)
    # linear-model losses: carry z = X w along instead of recomputing it
    z = loss.margins(w) if hasattr(loss, "gradient_at_margins") else None
    for t in range(1, iterations):
        g = loss.gradient(w) if z is None else loss.gradient_at_margins(z)
        scores = vertex_scores(g, lam)
        if noise is not None:
            scores = scores + noise(2 * p)
        idx = select_vertex(scores)
        j, step = idx % p, (lam if idx < p else -lam)
        mu = 2.0 / (t + 2)
        w *= 1.0 - mu
        w[j] += mu * step
        if z is not None:
            z *= 1.0 - mu
            z += (mu * step) * loss.column(j)
        if callback is not None:
            callback(t, w)
    return w


def nonprivate_frank_wolfe(data: Dataset, cfg: FwConfig, loss=None, callback=None) -> np.ndarray:
    """Noiseless Frank-Wolfe for the L1-constrained problem.

    Parameters
    ----------
    data : Dataset
        Must be scaled so every ``|x_ij| <= 1``.
    cfg : FwConfig
    loss : object, optional
        Anything with ``dim`` and ``gradient(w)``; defaults to
        ``LogisticLoss(data)``. Losses that also provide ``margins``,
        ``column`` and ``gradient_at_margins`` get the O(n) margin update.
    callback : callable, optional
        Called as ``callback(t, w)`` after each update.

    Returns
    -------
    ndarray, shape (p,)
        The final iterate ``w_T``.
    """
    require_scaled(data)
    loss = LogisticLoss(data) if loss is None else loss
    return _run(loss, cfg.lam, cfg.iterations, None, callback)


def private_lasso(data: Dataset, cfg: FwConfig, rng: RandomSource, loss=None,
                  callback=None) -> np.ndarray:
    """Differentially private Frank-Wolfe.

    Each of the ``2p`` vertex scores gets independent Laplace noise with
    scale :func:`laplace_noise_scale` before the argmin. The output is
    ``(cfg.epsilon, cfg.delta)``-differentially private when the per-sample
    loss is ``cfg.lipschitz``-Lipschitz in the L1 norm.
    """
    cfg.check_private()
    require_scaled(data)
    loss = LogisticLoss(data) if loss is None else loss
    scale = laplace_noise_scale(cfg, data.n)
    return _run(loss, cfg.lam, cfg.iterations,
                lambda size: sample_laplace(scale, rng, size), callback)
