import math

import numpy as np
import pytest

from privlasso.core import (
    Dataset,
    LogisticLoss,
    bce_gradient,
    bce_loss,
    hessian_vector_inf_norm,
    sigmoid,
)


def random_dataset(rng, n, p, scaled=True):
    X = rng.uniform(-1, 1, size=(n, p)) if scaled else rng.normal(size=(n, p)) * 3
    y = rng.integers(0, 2, size=n)
    return Dataset(X, y)


def naive_loss(w, X, y):
    total = 0.0
    for xi, yi in zip(X, y):
        u = sum(a * b for a, b in zip(w, xi))
        s = 1.0 / (1.0 + math.exp(-u))
        total += -yi * math.log(s) - (1 - yi) * math.log(1 - s)
    return total / len(y)


def central_difference(f, w, h=1e-5):
    g = np.zeros_like(w)
    for j in range(len(w)):
        e = np.zeros_like(w)
        e[j] = h
        g[j] = (f(w + e) - f(w - e)) / (2 * h)
    return g


def test_sigmoid_values():
    assert sigmoid(0.0) == 0.5
    assert sigmoid(1000.0) == 1.0
    assert sigmoid(-1000.0) == 0.0
    assert sigmoid(math.log(3)) == pytest.approx(0.75, abs=1e-15)


def test_sigmoid_stable_and_symmetric():
    u = np.linspace(-700, 700, 20001)
    with np.errstate(all="raise"):
        s = sigmoid(u)
    assert np.all(np.diff(s) >= 0)
    np.testing.assert_allclose(sigmoid(-u), 1 - s, atol=1e-15, rtol=0)
    assert np.isnan(sigmoid(np.nan))


def test_bce_loss_zero_weight_is_log2():
    rng = np.random.default_rng(0)
    data = random_dataset(rng, 17, 4)
    assert bce_loss(np.zeros(4), data) == pytest.approx(math.log(2), abs=1e-12)


def test_bce_loss_single_sample():
    data = Dataset(np.array([[1.0]]), np.array([1]))
    assert bce_loss(np.array([math.log(3)]), data) == pytest.approx(-math.log(0.75), abs=1e-15)


def test_bce_loss_matches_scalar_loop():
    rng = np.random.default_rng(1)
    data = random_dataset(rng, 5, 3)
    w = rng.normal(size=3)
    assert bce_loss(w, data) == pytest.approx(naive_loss(w, data.features, data.labels), abs=1e-12)


def test_bce_loss_finite_for_huge_weights():
    data = Dataset(np.array([[1.0], [-1.0]]), np.array([0, 1]))
    value = bce_loss(np.array([1e6]), data)
    assert np.isfinite(value)
    assert value == pytest.approx(-math.log(1e-15), rel=1e-4)


def test_dimension_mismatch():
    data = Dataset(np.ones((2, 3)), np.array([0, 1]))
    with pytest.raises(ValueError):
        bce_loss(np.zeros(2), data)
    with pytest.raises(ValueError):
        bce_gradient(np.zeros(4), data)


def test_gradient_small_cases():
    data = Dataset(np.array([[1.0, -1.0]]), np.array([1]))
    np.testing.assert_allclose(bce_gradient(np.zeros(2), data), [-0.5, 0.5])
    mirrored = Dataset(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([1, 0]))
    np.testing.assert_allclose(bce_gradient(np.zeros(2), mirrored), [-0.5, 0.0])


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(2)
    data = random_dataset(rng, 20, 6)
    w = rng.normal(size=6)
    fd = central_difference(lambda v: bce_loss(v, data), w)
    g = bce_gradient(w, data)
    assert np.max(np.abs(g - fd) / np.maximum(np.abs(fd), 1e-8)) < 1e-5


def test_logistic_loss_object_agrees():
    rng = np.random.default_rng(3)
    data = random_dataset(rng, 30, 5)
    w = rng.normal(size=5)
    loss = LogisticLoss(data)
    np.testing.assert_allclose(loss.gradient(w), bce_gradient(w, data), rtol=1e-13, atol=1e-15)
    assert loss.value(w) == bce_loss(w, data)
    assert loss.lipschitz == 1.0


def test_hessian_single_sample_quarter():
    data = Dataset(np.array([[1.0]]), np.array([0]))
    assert hessian_vector_inf_norm(np.zeros(1), np.array([1.0]), data) == 0.25


def test_hessian_matches_dense():
    rng = np.random.default_rng(4)
    data = random_dataset(rng, 10, 4)
    w = rng.normal(size=4)
    v = rng.normal(size=4)
    v /= np.abs(v).sum()
    X = data.features
    s = 1 / (1 + np.exp(-X @ w))
    H = X.T @ np.diag(s * (1 - s)) @ X / data.n
    assert hessian_vector_inf_norm(w, v, data) == pytest.approx(np.max(np.abs(H @ v)), abs=1e-12)


def test_hessian_rejects_unscaled():
    data = Dataset(np.array([[2.0]]), np.array([0]))
    with pytest.raises(ValueError):
        hessian_vector_inf_norm(np.zeros(1), np.array([1.0]), data)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.ones((3, 2)), np.ones(2))
    with pytest.raises(ValueError):
        Dataset(np.ones((0, 2)), np.ones(0))
    d = Dataset(np.array([[0.5, -1.0]]), np.array([1]))
    assert d.n == 1 and d.p == 2 and d.is_scaled
