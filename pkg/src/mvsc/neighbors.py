"""Adaptive-neighbour similarity learning.

Each instance keeps a probability row over the other instances.  Given a
pairwise distance table, the row that minimises

    sum_j d_ij * a_ij + gamma_i * ||a_i||^2   subject to  a_i on the simplex

has a closed form: with distances sorted ascending, entry j receives
``(-d_ij / (2 gamma_i) + 1/k + sum_{l<=k} d_(il) / (2 k gamma_i))`` clipped
at zero.  Choosing ``gamma_i = (k * d_(i,k+1) - sum_{l<=k} d_(il)) / 2``
makes that row sum to one with at most k nonzero entries, so each instance
adaptively connects to at most k neighbours.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .graph import SimilarityGraph

VARIANTS = ("mscam", "mscan")

SYMMETRY_TOL = 1e-9


@dataclass
class DistanceTable:
    """Symmetric nonnegative pairwise distances with zero diagonal."""

    d: np.ndarray
    variant: str = "mscan"

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValidationError("distance table must be square")
        if not np.all(np.isfinite(d)):
            raise ValidationError("distance table has non-finite entries")
        if d.min() < 0:
            raise ValidationError("distances must be nonnegative")
        if np.any(np.diag(d) != 0):
            raise ValidationError("distance diagonal must be zero")
        sym_err = np.abs(d - d.T).max()
        if sym_err > SYMMETRY_TOL:
            raise ValidationError(
                f"distance table must be symmetric (max asymmetry {sym_err:.3e})"
            )
        if self.variant not in VARIANTS:
            raise ValidationError(f"variant must be one of {VARIANTS}")
        self.d = d

    @property
    def n(self) -> int:
        return self.d.shape[0]


@dataclass
class GammaEstimate:
    """Per-row simplex regularisation weights and their mean."""

    per_row: np.ndarray
    average: float


def pairwise_distances(zs, ps, lam: float, variant: str) -> DistanceTable:
    """Squared distances between per-instance representations, summed over views.

    For ``mscam`` the representation of instance i in view v is the i-th
    column of ``z`` mapped through the view's projection (``p.T @ z``); for
    ``mscan`` it is the raw column of ``z``.  The total is scaled by ``lam``.
    """
    if variant not in VARIANTS:
        raise ValidationError(f"variant must be one of {VARIANTS}")
    if lam < 0:
        raise ValidationError("lam must be >= 0")
    if not zs:
        raise ValidationError("need at least one view state")
    n = zs[0].shape[1]
    total = np.zeros((n, n))
    if variant == "mscam":
        if ps is None or len(ps) != len(zs):
            raise ValidationError("mscam distances need one projection per view")
        for z, p in zip(zs, ps):
            if p.shape[0] != z.shape[0]:
                raise ValidationError(
                    f"projection rows {p.shape[0]} do not match z rows {z.shape[0]}"
                )
            total += _squared_column_distances(p.T @ z)
    else:
        for z in zs:
            if z.shape[1] != n:
                raise ValidationError("views disagree on instance count")
            total += _squared_column_distances(z)
    total *= lam
    return DistanceTable(d=_clean_distance_matrix(total), variant=variant)


def data_distance_table(views) -> DistanceTable:
    """Plain squared Euclidean distances on raw data columns, summed over views.

    Used to seed the similarity graph before any representation is learned.
    """
    n = views[0].shape[1]
    total = np.zeros((n, n))
    for v in views:
        total += _squared_column_distances(np.asarray(v, dtype=float))
    return DistanceTable(d=_clean_distance_matrix(total), variant="mscan")


def estimate_gamma(table: DistanceTable, k: int) -> GammaEstimate:
    """Per-row regularisation weights from the k and k+1 smallest distances.

    ``gamma_i = (k * d_(i,k+1) - sum_{l<=k} d_(il)) / 2`` over the row's
    off-diagonal distances sorted ascending; nonnegative by construction,
    zero exactly when the k+1 smallest distances coincide.
    """
    n = table.n
    if not 1 <= k <= n - 2:
        raise ValidationError(f"k must satisfy 1 <= k <= n-2 (k={k}, n={n})")
    off = _offdiagonal_rows(table.d)
    srt = np.sort(off, axis=1)
    gam = 0.5 * (k * srt[:, k] - srt[:, :k].sum(axis=1))
    gam = np.maximum(gam, 0.0)
    return GammaEstimate(per_row=gam, average=float(gam.mean()))


def row_update(distances, k: int, gamma: float) -> np.ndarray:
    """Closed-form simplex row for one instance's neighbour weights.

    ``distances`` holds the instance's distances to every other instance
    (self excluded).  With ``gamma`` chosen by :func:`estimate_gamma` the
    result is the exact minimiser of the regularised assignment problem and
    has at most k nonzero entries.  ``gamma == 0`` marks a degenerate row
    (k+1 nearest distances all equal); the weight then spreads uniformly
    over the k nearest entries, ties broken by ascending index.
    """
    d = np.asarray(distances, dtype=float).ravel()
    m = d.size
    if not 1 <= k <= m:
        raise ValidationError(f"k must satisfy 1 <= k <= len(d) (k={k}, m={m})")
    if gamma < 0:
        raise ValidationError("gamma must be >= 0")
    if gamma == 0:
        order = np.argsort(d, kind="stable")
        a = np.zeros(m)
        a[order[:k]] = 1.0 / k
        return a
    nearest_sum = np.partition(d, k - 1)[:k].sum()
    thresh = 1.0 / k + nearest_sum / (2.0 * k * gamma)
    a = np.maximum(thresh - d / (2.0 * gamma), 0.0)
    # entries sitting exactly on the threshold are zero analytically but can
    # keep a one-ulp residue; snap them so the sparsity pattern is exact
    peak = a.max()
    if peak > 0.0:
        a[a <= 1e-12 * peak] = 0.0
    return a


def update_similarity(table: DistanceTable, k: int,
                      use_average_gamma: bool = False) -> SimilarityGraph:
    """Rebuild the similarity graph row by row from a distance table.

    Default behaviour estimates a separate gamma per row, which keeps every
    row on the simplex in closed form.  With ``use_average_gamma`` the mean
    gamma is shared across rows and each row becomes the exact Euclidean
    projection of ``-d_i / (2 gamma)`` onto the simplex (the closed form
    only lands on the simplex for the per-row choice).
    """
    n = table.n
    gam = estimate_gamma(table, k)
    off = _offdiagonal_rows(table.d)
    out = np.zeros_like(off)
    if use_average_gamma:
        g = gam.average
        for i in range(n):
            if g > 0:
                out[i] = _project_simplex(-off[i] / (2.0 * g))
            else:
                out[i] = row_update(off[i], k, 0.0)
    else:
        pos = gam.per_row > 0
        if np.any(pos):
            g = gam.per_row[pos][:, None]
            rows = off[pos]
            order = np.argsort(rows, axis=1, kind="stable")
            nearest_sum = np.take_along_axis(rows, order[:, :k], axis=1).sum(
                axis=1
            )[:, None]
            thresh = 1.0 / k + nearest_sum / (2.0 * k * g)
            vals = np.maximum(thresh - rows / (2.0 * g), 0.0)
            # beyond the k nearest neighbours the closed form is zero or
            # negative analytically; zero those slots so rounding cannot leave
            # a stray positive at the cutoff
            np.put_along_axis(vals, order[:, k:], 0.0, axis=1)
            out[pos] = vals
        for i in np.nonzero(~pos)[0]:
            out[i] = row_update(off[i], k, 0.0)
    a = np.zeros((n, n))
    a[~np.eye(n, dtype=bool)] = out.ravel()
    return SimilarityGraph(a=a)


def _offdiagonal_rows(d: np.ndarray) -> np.ndarray:
    """Row-major (n, n-1) view of a square matrix with the diagonal dropped."""
    n = d.shape[0]
    return d[~np.eye(n, dtype=bool)].reshape(n, n - 1)


def _squared_column_distances(y: np.ndarray) -> np.ndarray:
    g = y.T @ y
    sq = np.diag(g).copy()
    d = sq[:, None] + sq[None, :] - 2.0 * g
    np.maximum(d, 0.0, out=d)
    return d


def _clean_distance_matrix(d: np.ndarray) -> np.ndarray:
    d = 0.5 * (d + d.T)
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {a : a >= 0, sum(a) = 1}."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u * idx > (css - 1.0))[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)
