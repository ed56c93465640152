"""Seeded noise sources for the private mechanisms.

Randomness comes from numpy's PCG64 bit generator, seeded through
``SeedSequence`` so that child streams for individual trials are derived
deterministically from ``(master seed, *keys)``.
"""

from __future__ import annotations

import math

import numpy as np


class RandomSource:
    """Reproducible sample stream backed by ``numpy.random.PCG64``.

    Parameters
    ----------
    seed : int or numpy.random.SeedSequence
        Non-negative integer (up to 64 bits) or an existing seed sequence.
    """

    def __init__(self, seed=0):
        if isinstance(seed, np.random.SeedSequence):
            self._seq = seed
        else:
            seed = int(seed)
            if seed < 0:
                raise ValueError("seed must be non-negative")
            self._seq = np.random.SeedSequence(seed)
        self.generator = np.random.Generator(np.random.PCG64(self._seq))

    @property
    def seed(self):
        return self._seq.entropy

    def child(self, *keys: int) -> "RandomSource":
        """Independent stream keyed by ``keys``; does not consume samples."""
        return RandomSource(self._child_seq(keys))

    def child_seed(self, *keys: int) -> int:
        """64-bit integer seed for the child stream keyed by ``keys``."""
        return int(self._child_seq(keys).generate_state(1, np.uint64)[0])

    def _child_seq(self, keys):
        spawn_key = tuple(self._seq.spawn_key) + tuple(int(k) for k in keys)
        return np.random.SeedSequence(self._seq.entropy, spawn_key=spawn_key)

    def laplace(self, scale, size=None):
        return self.generator.laplace(0.0, scale, size)

    def double_geometric(self, success_prob, size=None):
        g1 = self.generator.geometric(success_prob, size)
        g2 = self.generator.geometric(success_prob, size)
        return g1 - g2

    # thin passthroughs used by the data utilities
    def normal(self, size=None):
        return self.generator.standard_normal(size)

    def permutation(self, n):
        return self.generator.permutation(n)


class StubSource(RandomSource):
    """Deterministic stand-in returning fixed noise values.

    Used to exercise the mechanisms with known noise: every Laplace draw is
    ``laplace_value`` and every double-geometric draw is
    ``double_geometric_value``.
    """

    def __init__(self, laplace_value=0.0, double_geometric_value=0):
        super().__init__(0)
        self.laplace_value = float(laplace_value)
        self.double_geometric_value = int(double_geometric_value)

    def laplace(self, scale, size=None):
        if size is None:
            return self.laplace_value
        return np.full(size, self.laplace_value)

    def double_geometric(self, success_prob, size=None):
        if size is None:
            return self.double_geometric_value
        return np.full(size, self.double_geometric_value, dtype=np.int64)


def sample_laplace(scale: float, rng: RandomSource, size=None):
    """Draw from the zero-mean Laplace density ``exp(-|x|/b) / 2b``."""
    if not scale > 0:
        raise ValueError(f"Laplace scale must be positive, got {scale}")
    return rng.laplace(scale, size)


def sample_double_geometric(success_prob: float, rng: RandomSource, size=None):
    """Difference of two i.i.d. geometric variables on ``{1, 2, ...}``.

    ``P(X = k) = q**|k| (1 - q) / (1 + q)`` with ``q = 1 - success_prob``.
    """
    if not 0.0 < success_prob < 1.0:
        raise ValueError(
            f"success probability must lie in (0, 1), got {success_prob}")
    return rng.double_geometric(success_prob, size)


def double_geometric_param(epsilon: float, sensitivity: float) -> float:
    """Success probability ``1 - exp(-epsilon / sensitivity)``."""
    if epsilon <= 0 or sensitivity <= 0:
        raise ValueError("epsilon and sensitivity must be positive")
    return -math.expm1(-epsilon / sensitivity)


def double_geometric_pmf(k, success_prob: float):
    """Closed-form probability mass of the double-geometric law."""
    q = 1.0 - success_prob
    k = np.abs(np.asarray(k))
    return q ** k * (1.0 - q) / (1.0 + q)
