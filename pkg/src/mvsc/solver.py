"""Outer alternation: per-view representation learning vs. consensus graph.

Two variants share the loop.  ``mscam`` learns, per view, a self-
representation plus a low-dimensional projection (via the ADMM solver) and
measures instance distances in the projected space; ``mscan`` skips the
projection and measures distances between raw representation columns.
Either way the consensus graph is rebuilt in closed form from those
distances, and clusters are read off the graph's connected components.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .admm import AdmmConfig, ViewSolution, solve_view
from .data import MultiViewDataset
from .errors import NumericError, ValidationError
from .graph import (LaplacianBundle, SimilarityGraph, build_laplacian,
                    connected_components)
from .metrics import accuracy, nmi
from .neighbors import (VARIANTS, data_distance_table, estimate_gamma,
                        pairwise_distances, update_similarity)

logger = logging.getLogger(__name__)

LAMBDA_MIN = 1e-6
LAMBDA_MAX = 1e6

#: Relative objective increase above which a warning is logged.
INCREASE_WARN_TOL = 1e-3


@dataclass
class SolverConfig:
    """Knobs for :func:`fit`.

    ``lambda_adapt`` halves the graph-smoothing weight whenever the graph
    has too few components and doubles it when there are too many, clamped
    to ``[1e-6, 1e6]``.  ``use_average_gamma`` shares one simplex
    regularisation weight across rows instead of the per-row default.
    """

    c: int = 2
    alpha: float = 1.0
    lam: float = 1.0
    k: int = 9
    variant: str = "mscam"
    outer_max_iters: int = 30
    outer_tol: float = 1e-4
    lambda_adapt: bool = True
    use_average_gamma: bool = False
    seed: int = 0
    admm: AdmmConfig = field(default_factory=AdmmConfig)

    def __post_init__(self):
        if self.c < 2:
            raise ValidationError("c must be >= 2")
        if self.alpha < 0:
            raise ValidationError("alpha must be >= 0")
        if self.lam <= 0:
            raise ValidationError("lam must be > 0")
        if self.k < 1:
            raise ValidationError("k must be >= 1")
        if self.variant not in VARIANTS:
            raise ValidationError(f"variant must be one of {VARIANTS}")
        if self.outer_max_iters < 1:
            raise ValidationError("outer_max_iters must be >= 1")
        if self.outer_tol <= 0:
            raise ValidationError("outer_tol must be > 0")


@dataclass
class ClusteringResult:
    """Labels plus everything needed to audit the run."""

    labels: np.ndarray
    component_count: int
    objective_trace: list[float]
    graph: SimilarityGraph
    converged: bool
    used_fallback: bool
    outer_iterations: int
    final_lambda: float
    metrics: dict | None = None
    timings: dict | None = None


def objective(data: MultiViewDataset, zs, ps, graph: SimilarityGraph,
              config: SolverConfig) -> float:
    """Value of the joint objective at the given state.

    Reconstruction and ridge terms per view, plus ``lam`` times the graph
    smoothness of the (projected) representations, plus the simplex
    regulariser ``gamma * ||a||_F^2`` with ``gamma`` the mean of the
    per-row estimates on the current distance table.
    """
    lap = build_laplacian(graph).lap
    total = 0.0
    for v, z in zip(data.views, zs):
        resid = v - v @ z
        total += float(np.sum(resid * resid))
        total += config.alpha * float(np.sum(z * z))
    if config.variant == "mscam":
        for z, p in zip(zs, ps):
            y = p.T @ z
            total += config.lam * float(np.trace(y @ lap @ y.T))
    else:
        for z in zs:
            total += config.lam * float(np.trace(z @ lap @ z.T))
    table = pairwise_distances(zs, ps, config.lam, config.variant)
    gamma = estimate_gamma(table, config.k).average
    total += gamma * float(np.sum(graph.a * graph.a))
    return total


def mscan_update_z(x: np.ndarray, lap: np.ndarray, config: SolverConfig) -> np.ndarray:
    """Closed-form representation update for the projection-free variant.

    Stationarity of the reconstruction + ridge + graph-smoothness objective
    gives ``(x'x + alpha I) z + 2 lam z lap = x'x``, a Sylvester equation.
    Diagonalising both ``x'x`` and ``lap`` decouples it into independent
    scalar divisions.
    """
    x = np.asarray(x, dtype=float)
    lap = np.asarray(lap, dtype=float)
    gram = x.T @ x
    lap_vals, q = np.linalg.eigh(lap)
    gram_vals, u = np.linalg.eigh(gram)
    denom = gram_vals[:, None] + config.alpha + 2.0 * config.lam * lap_vals[None, :]
    if denom.min() <= 0:
        raise NumericError(
            "representation update is singular; a positive alpha fixes this")
    b = u.T @ gram @ q
    return u @ (b / denom) @ q.T


def adapt_lambda(component_count: int, c: int, lam: float) -> float:
    """Steer the smoothing weight toward the target component count.

    Too few components means the graph is over-connected, so the weight is
    halved; too many means over-fragmented, so it is doubled.  The result
    stays inside ``[1e-6, 1e6]``.
    """
    if component_count < c:
        lam = lam / 2.0
    elif component_count > c:
        lam = lam * 2.0
    return float(min(max(lam, LAMBDA_MIN), LAMBDA_MAX))


def extract_labels(graph: SimilarityGraph, c: int, seed: int = 0) -> np.ndarray:
    """Cluster labels from the graph.

    When the graph has exactly ``c`` connected components the component
    ids are the labels.  Otherwise fall back to a c-way spectral partition:
    k-means (seeded, deterministic) on the eigenvectors of the symmetrised
    Laplacian belonging to its c smallest eigenvalues.
    """
    count, comp_labels = connected_components(graph)
    if count == c:
        return comp_labels
    lap = build_laplacian(graph).lap
    _, vecs = np.linalg.eigh(lap)
    embedding = vecs[:, :c]
    return _kmeans(embedding, c, np.random.default_rng(seed))


def fit(data: MultiViewDataset, config: SolverConfig,
        workers: int = 1) -> ClusteringResult:
    """Alternate per-view solves with consensus-graph updates.

    Stops when the relative objective change drops below ``outer_tol``,
    when the graph holds exactly ``c`` components on two consecutive
    iterations, or after ``outer_max_iters``.  Each outer pass re-solves
    the per-view subproblems from their deterministic initialisation
    rather than warm-starting, which keeps passes independent of stale
    multiplier state.  Deterministic given the config; ``workers > 1``
    only parallelises independent per-view solves.
    """
    n = data.n
    if config.c > n:
        raise ValidationError(f"c={config.c} exceeds instance count n={n}")
    if config.k > n - 2:
        raise ValidationError(
            f"k={config.k} too large for n={n}; need k <= n-2")

    timings = {"subspace_s": 0.0, "graph_s": 0.0, "eval_s": 0.0}
    lam = config.lam
    t0 = time.perf_counter()
    graph = update_similarity(data_distance_table(data.views), config.k,
                              use_average_gamma=config.use_average_gamma)
    timings["graph_s"] += time.perf_counter() - t0

    zs: list[np.ndarray] = []
    ps: list[np.ndarray] | None = None
    trace: list[float] = []
    consecutive_hits = 0
    count = -1
    outer_done = 0

    for outer in range(1, config.outer_max_iters + 1):
        bundle = build_laplacian(graph)
        cfg_now = replace(config, lam=lam)

        t0 = time.perf_counter()
        if config.variant == "mscam":
            admm_cfg = replace(config.admm, alpha=config.alpha, lam=lam)
            sols = _solve_views(data, bundle, admm_cfg, config.c, workers)
            zs = [s.z for s in sols]
            ps = [s.p for s in sols]
        else:
            zs = [mscan_update_z(v, bundle.lap, cfg_now) for v in data.views]
            ps = None
        timings["subspace_s"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        table = pairwise_distances(zs, ps, lam, config.variant)
        graph = update_similarity(table, config.k,
                                  use_average_gamma=config.use_average_gamma)
        timings["graph_s"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        obj = objective(data, zs, ps, graph, cfg_now)
        if trace and obj > trace[-1] * (1.0 + INCREASE_WARN_TOL):
            logger.warning(
                "objective increased at outer iteration %d: %.6e -> %.6e",
                outer, trace[-1], obj)
        trace.append(obj)
        count, _ = connected_components(graph)
        timings["eval_s"] += time.perf_counter() - t0
        outer_done = outer

        consecutive_hits = consecutive_hits + 1 if count == config.c else 0
        if consecutive_hits >= 2:
            break
        if len(trace) >= 2:
            prev = trace[-2]
            if abs(obj - prev) <= config.outer_tol * max(1.0, abs(prev)):
                break
        if config.lambda_adapt:
            lam = adapt_lambda(count, config.c, lam)

    labels = extract_labels(graph, config.c, seed=config.seed)
    used_fallback = count != config.c
    metrics = None
    if data.labels is not None:
        metrics = {"acc": accuracy(labels, data.labels),
                   "nmi": nmi(labels, data.labels)}
    return ClusteringResult(labels=labels, component_count=count,
                            objective_trace=trace, graph=graph,
                            converged=(count == config.c),
                            used_fallback=used_fallback,
                            outer_iterations=outer_done,
                            final_lambda=lam, metrics=metrics,
                            timings=timings)


def _solve_views(data: MultiViewDataset, bundle: LaplacianBundle,
                 admm_cfg: AdmmConfig, c: int,
                 workers: int) -> list[ViewSolution]:
    def one(i: int) -> ViewSolution:
        try:
            sol = solve_view(data.views[i], bundle.lap, admm_cfg, c)
        except NumericError as e:
            raise NumericError(f"view {i}: {e}") from e
        if not sol.converged:
            logger.warning("view %d: ADMM hit max_iters without converging", i)
        return sol

    idx = range(data.n_views)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=min(workers, data.n_views)) as ex:
            return list(ex.map(one, idx))
    return [one(i) for i in idx]


def _kmeans(points: np.ndarray, c: int, rng: np.random.Generator,
            max_iters: int = 100) -> np.ndarray:
    """Small deterministic k-means with++-style seeding."""
    n = points.shape[0]
    centers = np.empty((c, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    dist = np.sum((points - centers[0]) ** 2, axis=1)
    for j in range(1, c):
        total = dist.sum()
        if total <= 0:
            centers[j] = points[rng.integers(n)]
        else:
            centers[j] = points[rng.choice(n, p=dist / total)]
        dist = np.minimum(dist, np.sum((points - centers[j]) ** 2, axis=1))
    labels = None
    for _it in range(max_iters):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(d2, axis=1)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(c):
            members = points[labels == j]
            if len(members):
                centers[j] = members.mean(axis=0)
    return labels.astype(np.int64)
