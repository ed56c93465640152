"""Support-recovery and classification metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .core import Dataset


@dataclass(frozen=True)
class SupportReport:
    true_positives: int
    false_positives: int
    false_negatives: int
    correct_zeros: int
    incorrect_zeros: int
    f1: float


def count_nonzero(w) -> int:
    """Exact count of nonzero coefficients (no tolerance)."""
    return int(np.count_nonzero(w))


def support_report(w, true_support, p: int) -> SupportReport:
    """Compare the support of ``w`` with ``true_support``.

    ``correct_zeros`` counts true-zero coordinates left at zero;
    ``incorrect_zeros`` counts true-nonzero coordinates set to zero.
    """
    truth = {int(j) for j in true_support}
    if any(j < 0 or j >= p for j in truth):
        raise ValueError("true support indices out of range")
    learned = {int(j) for j in np.flatnonzero(np.asarray(w).ravel()[:p])}
    tp = len(learned & truth)
    fp = len(learned - truth)
    fn = len(truth - learned)
    denom = 2 * tp + fp + fn
    return SupportReport(
        true_positives=tp,
        false_positives=fp,
        false_negatives=fn,
        correct_zeros=(p - len(truth)) - fp,
        incorrect_zeros=fn,
        f1=2 * tp / denom if denom else 0.0,
    )


def predict(w, features) -> np.ndarray:
    # sigmoid(u) > 0.5 iff u > 0; a margin of exactly 0 predicts class 0
    return (np.asarray(features) @ np.asarray(w) > 0).astype(np.int64)


def classification_error(w, data: Dataset) -> float:
    if data is None or data.n == 0:
        raise ValueError("empty evaluation set")
    return float(np.mean(predict(w, data.features) != data.labels))


def accuracy(w, data: Dataset) -> float:
    return 1.0 - classification_error(w, data)


def auc(scores, labels) -> float:
    """Area under the ROC curve via the Mann-Whitney U statistic.

    Tied scores contribute one half.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must have the same length")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative label")
    ranks = rankdata(scores)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))
