"""Dataset generation, LIBSVM text I/O, scaling and splitting."""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import Dataset
from .noise import RandomSource

DEFAULT_TRUE_WEIGHT = (10.0, 9.0, 8.0, 7.0, 6.0, 5.0, 4.0, 0.5)


class LibsvmParseError(ValueError):
    """Malformed LIBSVM input; ``lineno`` is 1-based (0 for whole-file errors)."""

    def __init__(self, message, lineno=0):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)


@dataclass(frozen=True)
class SyntheticSpec:
    """Correlated-Gaussian logistic benchmark.

    Rows are drawn from ``N(0, Sigma)`` with ``Sigma_ij = correlation**|i-j|``.
    The true weight defaults to ``(10, 9, 8, 7, 6, 5, 4, 0.5, 0, ..., 0)``.
    """

    n: int = 10_000
    p: int = 100
    correlation: float = 0.5
    true_weight: Optional[Sequence[float]] = None

    def __post_init__(self):
        if not abs(self.correlation) < 1:
            raise ValueError("|correlation| must be < 1")
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be positive")
        if self.true_weight is None and self.p < len(DEFAULT_TRUE_WEIGHT):
            raise ValueError(f"default true weight needs p >= {len(DEFAULT_TRUE_WEIGHT)}")
        if self.true_weight is not None and len(self.true_weight) != self.p:
            raise ValueError("true_weight length must equal p")

    def weight(self) -> np.ndarray:
        if self.true_weight is not None:
            return np.asarray(self.true_weight, dtype=float)
        w = np.zeros(self.p)
        w[:len(DEFAULT_TRUE_WEIGHT)] = DEFAULT_TRUE_WEIGHT
        return w


def ar1_gaussian(n: int, p: int, correlation: float, rng: RandomSource) -> np.ndarray:
    """``n`` draws from ``N(0, Sigma)``, ``Sigma_ij = correlation**|i-j|``.

    Built column by column with the stationary AR(1) recursion, which is
    exact for this covariance and avoids a Cholesky factorization.
    """
    z = rng.normal((n, p))
    x = np.empty_like(z)
    x[:, 0] = z[:, 0]
    innov = math.sqrt(1.0 - correlation ** 2)
    for j in range(1, p):
        x[:, j] = correlation * x[:, j - 1] + innov * z[:, j]
    return x


def generate_synthetic(spec: SyntheticSpec, rng: RandomSource):
    """Sample the synthetic benchmark.

    Returns
    -------
    data : Dataset
        Features scaled to unit max-abs per column; labels
        ``1[sigmoid(w* . x) > 0.5]`` computed on the scaled features.
    true_support : ndarray of int
        Indices where the true weight is nonzero.
    """
    raw = ar1_gaussian(spec.n, spec.p, spec.correlation, rng)
    X = _scale_columns(raw)
    w = spec.weight()
    # sigmoid(u) > 0.5 exactly when u > 0; ties go to class 0
    y = (X @ w > 0).astype(np.int64)
    return Dataset(X, y), np.flatnonzero(w)


def generate_synthetic_multiclass(n: int, p: int, classes: int, rng: RandomSource,
                                  correlation: float = 0.5, nonzeros_per_class: int = 3):
    """Multiclass analogue: label is ``argmax_k (W* x)_k``.

    Each class row of ``W*`` has ``nonzeros_per_class`` entries on its own
    block of features, so the true support is disjoint across classes.

    Returns
    -------
    data : Dataset
    true_weight : ndarray, shape (classes, p)
    """
    if classes < 2:
        raise ValueError("need at least two classes")
    if classes * nonzeros_per_class > p:
        raise ValueError("p too small for disjoint class supports")
    X = _scale_columns(ar1_gaussian(n, p, correlation, rng))
    W = np.zeros((classes, p))
    for k in range(classes):
        W[k, k * nonzeros_per_class:(k + 1) * nonzeros_per_class] = 5.0
    y = np.argmax(X @ W.T, axis=1).astype(np.int64)
    return Dataset(X, y), W


def _scale_columns(X: np.ndarray) -> np.ndarray:
    peak = np.max(np.abs(X), axis=0)
    peak[peak == 0] = 1.0
    return X / peak


def scale_features(data: Dataset) -> Dataset:
    """Divide each column by its maximum absolute value.

    All-zero columns are left alone. Idempotent.
    """
    return Dataset(_scale_columns(data.features), data.labels)


def normalize_rows(data: Dataset) -> Dataset:
    """Divide each sample by its Euclidean norm (zero rows untouched)."""
    norms = np.linalg.norm(data.features, axis=1)
    norms[norms == 0] = 1.0
    return Dataset(data.features / norms[:, None], data.labels)


def split(data: Dataset, fractions, rng: RandomSource):
    """Random disjoint train/validation/test partition.

    Sizes are ``floor(n * f)`` with the remainder handed out to the largest
    fractional parts, so each size is within one of ``n * f``. Returns three
    datasets; a split with fraction 0 is ``None``.
    """
    fractions = np.asarray(fractions, dtype=float)
    if fractions.shape != (3,) or np.any(fractions < 0):
        raise ValueError("fractions must be three non-negative numbers")
    if abs(fractions.sum() - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {fractions.sum()}")
    sizes = _split_sizes(data.n, fractions)
    for f, s, name in zip(fractions, sizes, ("train", "validation", "test")):
        if f > 0 and s == 0:
            raise ValueError(f"{name} split is empty: n={data.n} too small")
    parts = split_indices(data.n, fractions, rng)
    return tuple(data.subset(idx) if len(idx) else None for idx in parts)


def split_indices(n: int, fractions, rng: RandomSource):
    """Sorted index arrays of the partition :func:`split` draws."""
    sizes = _split_sizes(n, np.asarray(fractions, dtype=float))
    perm = rng.permutation(n)
    bounds = np.cumsum([0, *sizes])
    return tuple(np.sort(perm[bounds[i]:bounds[i + 1]]) for i in range(3))


def _split_sizes(n, fractions):
    raw = n * fractions
    sizes = np.floor(raw).astype(int)
    order = np.argsort(-(raw - sizes), kind="stable")
    for i in order[:n - sizes.sum()]:
        sizes[i] += 1
    return sizes


def stratified_subsample(data: Dataset, size: int, positives: int, rng: RandomSource) -> Dataset:
    """Random subsample with exactly ``positives`` samples of label 1."""
    pos = np.flatnonzero(data.labels == 1)
    neg = np.flatnonzero(data.labels != 1)
    negatives = size - positives
    if positives > len(pos) or negatives > len(neg) or negatives < 0:
        raise ValueError(
            f"cannot draw {positives} positives / {negatives} negatives "
            f"from {len(pos)} / {len(neg)}")
    pick = np.concatenate([pos[rng.permutation(len(pos))[:positives]],
                           neg[rng.permutation(len(neg))[:negatives]]])
    return data.subset(np.sort(pick))


def parse_libsvm(source, n_features: Optional[int] = None, binary: bool = True) -> Dataset:
    """Parse LIBSVM ``label idx:val ...`` text.

    Parameters
    ----------
    source : str, bytes, or file object
        The text itself (not a path; see :func:`load_libsvm`).
    n_features : int, optional
        Override for ``p``; otherwise the largest index seen.
    binary : bool
        Map labels to ``{0, 1}`` (``-1``/``0`` to 0, ``+1`` to 1). Otherwise
        labels must be non-negative integers; if none of them is 0 they are
        taken as 1-based and shifted down by one.

    Blank lines and ``#`` comments are skipped. Indices are 1-based and must
    be strictly ascending within a line.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    lines = io.StringIO(source) if isinstance(source, str) else source

    labels, rows, cols, vals = [], [], [], []
    max_index = 0
    for lineno, raw in enumerate(lines, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise LibsvmParseError(f"bad label {tokens[0]!r}", lineno) from None
        row = len(labels)
        labels.append(label)
        prev = 0
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise LibsvmParseError(f"malformed token {tok!r}", lineno)
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise LibsvmParseError(f"malformed token {tok!r}", lineno) from None
            if idx < 1:
                raise LibsvmParseError(f"index {idx} < 1", lineno)
            if idx <= prev:
                raise LibsvmParseError(f"index {idx} not ascending after {prev}", lineno)
            prev = idx
            rows.append(row)
            cols.append(idx - 1)
            vals.append(val)
        max_index = max(max_index, prev)

    if not labels:
        raise LibsvmParseError("no samples")
    p = max_index if n_features is None else int(n_features)
    if max_index > p:
        raise LibsvmParseError(f"index {max_index} exceeds n_features={p}")
    if p < 1:
        raise LibsvmParseError("no features")
    X = np.zeros((len(labels), p))
    X[rows, cols] = vals
    return Dataset(X, _map_labels(np.asarray(labels), binary))


def _map_labels(labels, binary):
    if binary:
        bad = ~np.isin(labels, (-1.0, 0.0, 1.0))
        if bad.any():
            raise LibsvmParseError(f"non-binary label {labels[bad][0]!r}")
        return (labels > 0).astype(np.int64)
    if np.any(labels != np.round(labels)) or np.any(labels < 0):
        raise LibsvmParseError("multiclass labels must be non-negative integers")
    y = labels.astype(np.int64)
    return y - 1 if y.min() >= 1 else y


def load_libsvm(path, n_features: Optional[int] = None, binary: bool = True) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_libsvm(fh, n_features=n_features, binary=binary)


def dump_libsvm(data: Dataset, fh, signed_labels: bool = True) -> None:
    """Write ``data`` as LIBSVM text; zeros are omitted.

    Binary labels are written as ``+1``/``-1`` when ``signed_labels``.
    Values use ``repr`` so a parse round-trip is exact.
    """
    binary = data.is_binary()
    for x, y in zip(data.features, data.labels):
        if binary and signed_labels:
            head = "+1" if y == 1 else "-1"
        else:
            head = str(int(y))
        nz = np.flatnonzero(x)
        fh.write(" ".join([head, *(f"{j + 1}:{float(x[j])!r}" for j in nz)]) + "\n")


def save_libsvm(data: Dataset, path, signed_labels: bool = True) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        dump_libsvm(data, fh, signed_labels=signed_labels)


def support_sidecar_path(path) -> str:
    return os.fspath(path) + ".support"


def save_support(indices, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for j in indices:
            fh.write(f"{int(j)}\n")


def load_support(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        return np.array([int(line) for line in fh if line.strip()], dtype=np.int64)
