"""Row-stochastic similarity graphs, Laplacians, and component extraction.

The consensus graph is a nonnegative matrix with zero diagonal whose rows
sum to one.  Spectral bookkeeping runs on the symmetrised graph: the number
of connected components equals the multiplicity of the Laplacian's zero
eigenvalue, which is what the solver uses to read clusters off the graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError

#: Entries of the symmetrised graph at or below this weight are treated as
#: absent when walking connected components.
DEFAULT_EDGE_EPS = 1e-12

ROW_SUM_TOL = 1e-9


@dataclass
class SimilarityGraph:
    """Validated row-stochastic similarity matrix with zero diagonal."""

    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError("similarity matrix must be square")
        if a.shape[0] < 2:
            raise ValidationError("similarity graph needs at least two nodes")
        if not np.all(np.isfinite(a)):
            raise ValidationError("similarity matrix has non-finite entries")
        if a.min() < 0:
            raise ValidationError("similarity weights must be nonnegative")
        if np.any(np.diag(a) != 0):
            raise ValidationError("similarity diagonal must be zero")
        row_err = np.abs(a.sum(axis=1) - 1.0).max()
        if row_err > ROW_SUM_TOL:
            raise ValidationError(
                f"rows must sum to 1 (max deviation {row_err:.3e})"
            )
        self.a = a

    @property
    def n(self) -> int:
        return self.a.shape[0]


@dataclass
class LaplacianBundle:
    """Symmetrised graph, diagonal degree matrix, and Laplacian ``d - a_sym``."""

    a_sym: np.ndarray
    d: np.ndarray
    lap: np.ndarray

    @property
    def n(self) -> int:
        return self.lap.shape[0]


def build_laplacian(graph: SimilarityGraph) -> LaplacianBundle:
    """Symmetrise the graph and form its unnormalised Laplacian.

    The Laplacian of a nonnegative symmetric matrix is diagonally dominant,
    hence positive semidefinite by construction.
    """
    a_sym = 0.5 * (graph.a + graph.a.T)
    deg = a_sym.sum(axis=1)
    lap = np.diag(deg) - a_sym
    return LaplacianBundle(a_sym=a_sym, d=np.diag(deg), lap=lap)


def connected_components(graph: SimilarityGraph,
                         edge_eps: float = DEFAULT_EDGE_EPS):
    """Count components of the symmetrised graph and label each node.

    Edges with symmetrised weight > ``edge_eps`` are kept.  Component ids
    are assigned in order of the lowest-index node they contain, so the
    labeling is deterministic.

    Returns
    -------
    count : int
    labels : (n,) int array with values in ``[0, count)``
    """
    a_sym = 0.5 * (graph.a + graph.a.T)
    adj = a_sym > edge_eps
    n = graph.n
    labels = np.full(n, -1, dtype=np.int64)
    count = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = count
        while stack:
            u = stack.pop()
            for v in np.nonzero(adj[u])[0]:
                if labels[v] < 0:
                    labels[v] = count
                    stack.append(v)
        count += 1
    return count, labels


def zero_eigenvalue_multiplicity(bundle: LaplacianBundle,
                                 eig_eps: float | None = None) -> int:
    """Number of Laplacian eigenvalues below ``eig_eps`` (default ``1e-8 * n``)."""
    if eig_eps is None:
        eig_eps = 1e-8 * bundle.n
    if eig_eps <= 0:
        raise ValidationError("eig_eps must be > 0")
    vals = np.linalg.eigvalsh(bundle.lap)
    return int(np.sum(vals < eig_eps))


def write_matrix_csv(graph: SimilarityGraph, path) -> None:
    """Dump the similarity matrix as plain CSV (one row per line)."""
    np.savetxt(Path(path), graph.a, delimiter=",", fmt="%.17g")


def write_edge_list(graph: SimilarityGraph, path) -> None:
    """Write nonzero directed edges as ``i,j,weight`` lines."""
    rows, cols = np.nonzero(graph.a)
    with open(Path(path), "w") as fh:
        for i, j in zip(rows.tolist(), cols.tolist()):
            fh.write(f"{i},{j},{graph.a[i, j]:.17g}\n")
