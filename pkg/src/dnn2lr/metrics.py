"""Ranking metrics for binary classifiers: AUC and the KS statistic.

Both are functions of the score ordering only. AUC uses the rank-sum
formulation with average ranks for ties, which equals the probability that a
random positive outranks a random negative (ties count one half). KS is the
largest gap between the cumulative score distributions of the two classes,
evaluated at the distinct score boundaries.
"""

from __future__ import annotations

import numpy as np

from .errors import UndefinedMetricError


def _check_inputs(labels, scores) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(labels, dtype=np.float64).ravel()
    s = np.asarray(scores, dtype=np.float64).ravel()
    if y.shape != s.shape:
        raise ValueError(f"labels and scores disagree in length: {y.size} vs {s.size}")
    if y.size == 0:
        raise UndefinedMetricError("no samples")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("labels must be 0 or 1")
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == y.size:
        raise UndefinedMetricError("metric undefined: only one class present")
    return y, s


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks, tied scores sharing the mean of their rank block."""
    k = scores.size
    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]
    starts = np.flatnonzero(np.r_[True, sorted_scores[1:] != sorted_scores[:-1]])
    ends = np.r_[starts[1:], k]
    # Mean of the integer ranks start+1 .. end is (start + end + 1) / 2.
    block_rank = (starts + ends + 1) / 2.0
    ranks = np.empty(k, dtype=np.float64)
    ranks[order] = np.repeat(block_rank, ends - starts)
    return ranks


def auc(labels, scores) -> float:
    """Area under the ROC curve via the rank-sum identity, O(K log K)."""
    y, s = _check_inputs(labels, scores)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    ranks = _average_ranks(s)
    u = ranks[y == 1.0].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def ks(labels, scores) -> float:
    """Kolmogorov-Smirnov separation: max |F_pos(t) - F_neg(t)| over thresholds."""
    y, s = _check_inputs(labels, scores)
    n_pos = y.sum()
    n_neg = y.size - n_pos
    order = np.argsort(s, kind="mergesort")
    y_sorted = y[order]
    s_sorted = s[order]
    cum_pos = np.cumsum(y_sorted) / n_pos
    cum_neg = np.cumsum(1.0 - y_sorted) / n_neg
    # Evaluate only where the score actually changes; within a tie block the
    # empirical CDFs jump together at the block end.
    boundary = np.r_[s_sorted[1:] != s_sorted[:-1], True]
    return float(np.abs(cum_pos[boundary] - cum_neg[boundary]).max())
