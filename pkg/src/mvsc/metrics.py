"""Clustering agreement metrics: best-match accuracy and NMI."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ValidationError


@dataclass
class ContingencyTable:
    """Cross-tabulation of two labelings over the same instances."""

    counts: np.ndarray  # (r, s) nonnegative ints
    n: int


def contingency_table(pred, truth) -> ContingencyTable:
    pred = np.asarray(pred, dtype=np.int64).ravel()
    truth = np.asarray(truth, dtype=np.int64).ravel()
    if pred.size != truth.size:
        raise ValidationError(
            f"label vectors differ in length ({pred.size} vs {truth.size})")
    if pred.size == 0:
        raise ValidationError("label vectors are empty")
    _, pi = np.unique(pred, return_inverse=True)
    _, ti = np.unique(truth, return_inverse=True)
    r, s = pi.max() + 1, ti.max() + 1
    counts = np.zeros((r, s), dtype=np.int64)
    np.add.at(counts, (pi, ti), 1)
    return ContingencyTable(counts=counts, n=pred.size)


def accuracy(pred, truth) -> float:
    """Fraction of instances matched under the best one-to-one cluster map.

    The map is found by an optimal-assignment (Hungarian) routine on the
    contingency table; when the two labelings use different numbers of
    clusters the extra clusters simply stay unmatched.
    """
    table = contingency_table(pred, truth)
    rows, cols = linear_sum_assignment(table.counts, maximize=True)
    return float(table.counts[rows, cols].sum()) / table.n


def nmi(pred, truth, normalization: str = "geometric") -> float:
    """Normalised mutual information between two labelings.

    Natural logarithms, ``0 log 0 = 0``.  The default normalisation divides
    mutual information by the geometric mean of the two entropies;
    ``normalization="arithmetic"`` uses the arithmetic mean instead.
    Identical partitions (up to relabeling) score exactly 1.0, including
    the case where both are the single-cluster partition; if only one side
    has zero entropy the score is 0.0.
    """
    if normalization not in ("geometric", "arithmetic"):
        raise ValidationError("normalization must be 'geometric' or 'arithmetic'")
    table = contingency_table(pred, truth)
    counts = table.counts
    n = table.n
    if (np.count_nonzero(counts, axis=1).max() <= 1
            and np.count_nonzero(counts, axis=0).max() <= 1):
        return 1.0  # one nonzero per row and column: same partition relabeled
    row = counts.sum(axis=1)
    col = counts.sum(axis=0)
    h_pred = _entropy(row, n)
    h_truth = _entropy(col, n)
    if h_pred == 0.0 or h_truth == 0.0:
        return 0.0
    nz = counts > 0
    p = counts[nz] / n
    outer = (row[:, None] * col[None, :])[nz] / (n * n)
    info = float(np.sum(p * np.log(p / outer)))
    if normalization == "geometric":
        denom = float(np.sqrt(h_pred * h_truth))
    else:
        denom = 0.5 * (h_pred + h_truth)
    return info / denom


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))
