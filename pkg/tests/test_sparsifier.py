import math

import numpy as np
import pytest

from privlasso.core import Dataset
from privlasso.frank_wolfe import nonprivate_frank_wolfe, private_lasso
from privlasso.noise import RandomSource, StubSource
from privlasso.sparsifier import (
    SparsifierConfig,
    keep_top_k,
    private_support_size,
    sparsifier,
)


def weights_with(count, p=100):
    w = np.zeros(p)
    w[:count] = 1.0
    return w


def hand_trace(c0, alpha, beta, rho, noise, p):
    c = min(max(c0, alpha), beta)
    c = c + noise
    c = min(max(c, alpha), beta)
    c = round(c * rho)
    return min(max(c, 0), p)


def sort_oracle(w, c):
    order = sorted(range(len(w)), key=lambda j: (-abs(w[j]), j))
    out = np.zeros(len(w))
    for j in order[:c]:
        out[j] = w[j]
    return out


@pytest.mark.parametrize("c0, noise, rho, expected", [
    (12, 0, 1.0, 12),
    (3, 100, 1.0, 20),
    (12, 0, 0.5, 6),
])
def test_support_size_examples(c0, noise, rho, expected):
    cfg = SparsifierConfig(alpha=10, beta=20, rho=rho)
    c = private_support_size(weights_with(c0), cfg, 100, StubSource(double_geometric_value=noise))
    assert c == expected
    assert isinstance(c, int)


def test_support_size_hand_trace():
    rng = np.random.default_rng(0)
    for _ in range(500):
        p = int(rng.integers(1, 60))
        alpha = float(rng.uniform(0, 10))
        beta = alpha + float(rng.uniform(0.5, 30))
        rho = float(rng.uniform(0.1, 3))
        c0 = int(rng.integers(0, p + 1))
        noise = int(rng.integers(-40, 41))
        cfg = SparsifierConfig(alpha=alpha, beta=beta, rho=rho)
        got = private_support_size(weights_with(c0, p), cfg, p, StubSource(double_geometric_value=noise))
        assert got == hand_trace(c0, alpha, beta, rho, noise, p)


def test_support_size_defaults_alpha_beta():
    # p = 100 gives alpha = 10, beta = 20
    c = private_support_size(weights_with(3), SparsifierConfig(), 100, StubSource(double_geometric_value=0))
    assert c == 10
    c = private_support_size(weights_with(50), SparsifierConfig(), 100, StubSource(double_geometric_value=0))
    assert c == 20


def test_support_size_monotone_in_rho():
    for noise in (-7, 0, 3, 15):
        stub = StubSource(double_geometric_value=noise)
        sizes = [private_support_size(weights_with(14), SparsifierConfig(alpha=10, beta=20, rho=r), 100, stub)
                 for r in np.linspace(0.1, 5, 40)]
        assert all(a <= b for a, b in zip(sizes, sizes[1:]))


def test_support_size_rejects_bad_clip():
    with pytest.raises(ValueError):
        SparsifierConfig(alpha=5, beta=5)
    # default alpha = sqrt(4) = 2 collides with an explicit beta below it
    with pytest.raises(ValueError):
        private_support_size(np.zeros(4), SparsifierConfig(beta=1.0), 4, StubSource())


def test_support_size_real_noise_stays_in_range():
    rng = RandomSource(1)
    cfg = SparsifierConfig(epsilon1=0.05)
    sizes = [private_support_size(weights_with(7), cfg, 100, rng) for _ in range(300)]
    assert all(10 <= c <= 20 for c in sizes)
    # huge noise relative to the clip window: both ends get hit
    assert 10 in sizes and 20 in sizes


def test_keep_top_k_examples():
    np.testing.assert_array_equal(keep_top_k([0.5, -0.2, 0, 0.7], 2), [0.5, 0, 0, 0.7])
    np.testing.assert_array_equal(keep_top_k([0.5, -0.2, 0, 0.7], 0), np.zeros(4))
    np.testing.assert_array_equal(keep_top_k([0.3, -0.3, 0.3], 2), [0.3, -0.3, 0])
    with pytest.raises(ValueError):
        keep_top_k([1.0, 2.0], 3)
    with pytest.raises(ValueError):
        keep_top_k([1.0, 2.0], -1)


def test_keep_top_k_matches_sort_oracle():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        p = int(rng.integers(1, 30))
        w = rng.normal(size=p)
        w[rng.random(p) < 0.4] = 0.0
        # force some ties
        if p > 3:
            w[1] = -w[0]
        c = int(rng.integers(0, p + 1))
        out = keep_top_k(w, c)
        np.testing.assert_array_equal(out, sort_oracle(w, c))
        assert np.count_nonzero(out) <= c


def test_keep_top_k_returns_all_nonzeros_when_c_large():
    w = np.array([0.0, 0.4, 0.0, -0.1])
    np.testing.assert_array_equal(keep_top_k(w, 4), w)


@pytest.fixture
def toy():
    rng = np.random.default_rng(2)
    X = rng.uniform(-1, 1, size=(200, 25))
    y = (X[:, 0] - X[:, 1] + 0.5 * X[:, 2] > 0).astype(int)
    return Dataset(X, y)


def test_sparsifier_contract(toy):
    cfg = SparsifierConfig(lam=5.0, iterations=200, nonprivate_iterations=2000, delta=1 / toy.n)
    rng = RandomSource(4)
    w = sparsifier(toy, cfg, rng)
    assert np.abs(w).sum() <= cfg.lam + 1e-9
    assert np.count_nonzero(w) <= math.ceil(2 * math.sqrt(25))
    assert cfg.epsilon_total == pytest.approx(1.0)


def test_sparsifier_zero_noise_trace(toy):
    cfg = SparsifierConfig(lam=5.0, iterations=100, nonprivate_iterations=1000, delta=0.01,
                           alpha=2, beta=8)
    stub = StubSource(laplace_value=0.0, double_geometric_value=0)
    w_np = nonprivate_frank_wolfe(toy, cfg.nonprivate_fw())
    c = private_support_size(w_np, cfg, toy.p, stub)
    expected = keep_top_k(private_lasso(toy, cfg.private_fw(), stub), c)
    a = sparsifier(toy, cfg, StubSource())
    b = sparsifier(toy, cfg, StubSource(), w_nonprivate=w_np)
    np.testing.assert_array_equal(a, expected)
    np.testing.assert_array_equal(a, b)


def test_sparsifier_support_bound_holds_across_seeds(toy):
    cfg = SparsifierConfig(lam=5.0, iterations=150, nonprivate_iterations=1000, delta=0.01,
                           alpha=2, beta=6, rho=0.7)
    w_np = nonprivate_frank_wolfe(toy, cfg.nonprivate_fw())
    for seed in range(10):
        rng = RandomSource(seed)
        c = private_support_size(w_np, cfg, toy.p, RandomSource(seed))
        w = sparsifier(toy, cfg, rng, w_nonprivate=w_np)
        assert np.count_nonzero(w) <= c
