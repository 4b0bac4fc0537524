"""Independent oracles and generators shared by the test suite.

Everything here is deliberately written against the mathematical
definitions rather than the library internals, so agreement between an
oracle and the implementation is meaningful evidence of correctness.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import scipy.linalg


# ---------------------------------------------------------------------------
# simplex quadratic program
# ---------------------------------------------------------------------------

def simplex_qp_oracle(d: np.ndarray, gamma: float) -> np.ndarray:
    """Minimize ``||a + d/(2*gamma)||^2`` over the probability simplex.

    Active-set method: the minimizer is the Euclidean projection of
    ``v = -d/(2*gamma)`` onto the simplex, whose support is a prefix of
    ``v`` sorted descending.  Every prefix size is tried; the unique
    candidate whose primal solution is feasible and whose KKT residual
    vanishes is returned.
    """
    d = np.asarray(d, dtype=float)
    if gamma <= 0:
        raise ValueError("oracle requires gamma > 0")
    v = -d / (2.0 * gamma)
    order = np.argsort(-v, kind="stable")
    best = None
    for s in range(1, len(v) + 1):
        support = order[:s]
        theta = (1.0 - v[support].sum()) / s
        inside = v[support] + theta
        # primal feasibility on the guessed support (tiny negatives are
        # boundary roundoff, anything larger means the prefix is too long)
        if np.any(inside < -1e-12):
            continue
        # KKT: coordinates left out must not want back in
        rest = np.setdiff1d(np.arange(len(v)), support, assume_unique=True)
        if np.any(v[rest] + theta > 1e-12):
            continue
        a = np.zeros(len(v))
        a[support] = np.maximum(inside, 0.0)
        obj = float(np.sum((a - v) ** 2))
        if best is None or obj < best[0]:
            best = (obj, a)
    assert best is not None, "no feasible active set found"
    return best[1]


def random_simplex_points(rng: np.random.Generator, m: int, count: int) -> np.ndarray:
    """``count`` points drawn uniformly from the ``m``-simplex."""
    return rng.dirichlet(np.ones(m), size=count)


# ---------------------------------------------------------------------------
# graph reachability
# ---------------------------------------------------------------------------

def floyd_warshall_components(adj: np.ndarray) -> tuple[int, np.ndarray]:
    """Component count and ids via transitive closure of a boolean adjacency."""
    n = adj.shape[0]
    reach = adj.astype(bool) | np.eye(n, dtype=bool)
    for k in range(n):
        reach |= reach[:, k:k + 1] & reach[k:k + 1, :]
    labels = -np.ones(n, dtype=np.int64)
    count = 0
    for i in range(n):
        if labels[i] < 0:
            labels[reach[i]] = count
            count += 1
    return count, labels


def random_block_graph(rng: np.random.Generator, blocks: int,
                       min_size: int = 2, max_size: int = 30) -> tuple[np.ndarray, int]:
    """Row-stochastic block-diagonal similarity with ``blocks`` components.

    Every within-block off-diagonal entry is strictly positive, so each
    block is one connected component by construction.
    """
    sizes = rng.integers(min_size, max_size + 1, size=blocks)
    n = int(sizes.sum())
    a = np.zeros((n, n))
    start = 0
    for size in sizes:
        block = rng.uniform(0.1, 1.0, size=(size, size))
        np.fill_diagonal(block, 0.0)
        block /= block.sum(axis=1, keepdims=True)
        a[start:start + size, start:start + size] = block
        start += size
    perm = rng.permutation(n)
    return a[np.ix_(perm, perm)], n


# ---------------------------------------------------------------------------
# clustering metrics
# ---------------------------------------------------------------------------

def brute_force_accuracy(pred: np.ndarray, truth: np.ndarray) -> float:
    """Best matched fraction over all injective cluster-to-class maps."""
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    pred_ids = np.unique(pred)
    truth_ids = np.unique(truth)
    n = len(pred)
    best = 0
    if len(pred_ids) <= len(truth_ids):
        for mapping in itertools.permutations(truth_ids, len(pred_ids)):
            relabeled = dict(zip(pred_ids, mapping))
            hits = sum(relabeled[p] == t for p, t in zip(pred, truth))
            best = max(best, hits)
    else:
        for mapping in itertools.permutations(pred_ids, len(truth_ids)):
            relabeled = dict(zip(truth_ids, mapping))
            hits = sum(p == relabeled[t] for p, t in zip(pred, truth))
            best = max(best, hits)
    return best / n


def nmi_scalar_oracle(pred: np.ndarray, truth: np.ndarray,
                      normalization: str = "geometric") -> float:
    """NMI computed with plain Python loops straight from the definition."""
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    n = len(pred)
    pred_ids = sorted(set(pred.tolist()))
    truth_ids = sorted(set(truth.tolist()))
    joint = {}
    for p, t in zip(pred.tolist(), truth.tolist()):
        joint[(p, t)] = joint.get((p, t), 0) + 1
    p_marg = {i: sum(v for (a, _), v in joint.items() if a == i) / n for i in pred_ids}
    t_marg = {j: sum(v for (_, b), v in joint.items() if b == j) / n for j in truth_ids}
    info = 0.0
    for (i, j), cnt in joint.items():
        pij = cnt / n
        info += pij * math.log(pij / (p_marg[i] * t_marg[j]))
    h_pred = -sum(p * math.log(p) for p in p_marg.values() if p > 0)
    h_truth = -sum(p * math.log(p) for p in t_marg.values() if p > 0)
    if h_pred == 0.0 or h_truth == 0.0:
        return 1.0 if (len(pred_ids) == 1 and len(truth_ids) == 1) else 0.0
    if normalization == "geometric":
        denom = math.sqrt(h_pred * h_truth)
    else:
        denom = (h_pred + h_truth) / 2.0
    return info / denom


# ---------------------------------------------------------------------------
# linear algebra
# ---------------------------------------------------------------------------

def polar_oracle(m: np.ndarray) -> np.ndarray:
    """Orthonormal polar factor via the library polar decomposition."""
    u, _ = scipy.linalg.polar(m)
    return u


def random_stiefel(rng: np.random.Generator, n: int, c: int) -> np.ndarray:
    """A uniformly random matrix with orthonormal columns."""
    q, r = np.linalg.qr(rng.standard_normal((n, c)))
    return q * np.sign(np.diag(r))


def finite_difference_gradient(f, x: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of scalar ``f`` at flat array ``x``."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        hi = x.copy()
        lo = x.copy()
        hi.flat[i] += step
        lo.flat[i] -= step
        grad.flat[i] = (f(hi) - f(lo)) / (2.0 * step)
    return grad


# ---------------------------------------------------------------------------
# data generators
# ---------------------------------------------------------------------------

def planted_two_subspace(rng: np.random.Generator, n: int = 40, d: int = 20,
                         sub_dim: int = 3) -> np.ndarray:
    """Columns drawn from a union of two random ``sub_dim``-dimensional subspaces."""
    half = n // 2
    x = np.empty((d, n))
    for sl, m in ((slice(0, half), half), (slice(half, n), n - half)):
        basis, _ = np.linalg.qr(rng.standard_normal((d, sub_dim)))
        x[:, sl] = basis @ rng.standard_normal((sub_dim, m))
    return x
