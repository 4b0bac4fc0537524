"""Per-view subspace representation learning via ADMM.

One view solves, for data ``x`` (features by instances) and a fixed graph
Laplacian ``lap``:

    min_{z, p}  ||x - x z||_F^2 + alpha ||z||_F^2
                + lam * tr(p' z lap z' p)
    s.t.        p' z z' p = I_c

The orthogonality constraint is split off through two auxiliaries: ``w``
stands in for ``z' p`` (kept orthonormal), and ``paux`` shadows ``p``.
Scaled multipliers ``y1`` (for ``w - z' p``) and ``y2`` (for ``paux - p``)
plus a geometrically growing penalty ``mu`` tie the splits together.  Each
sweep refreshes z, p, paux, and w in turn, every update reading the
freshest values, then takes an ascent step on the multipliers.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .errors import NumericError, ValidationError


@dataclass
class AdmmConfig:
    """Penalty schedule and tolerances for the per-view solver.

    ``z_ridge_uses_lambda`` swaps the Tikhonov coefficient in the z step
    from ``alpha`` to ``lam`` (an alternative variant of the update; the
    default keeps the coefficient that matches the objective being solved).
    """

    alpha: float = 1.0
    lam: float = 1.0
    rho: float = 1.1
    eps: float = 1e-6
    mu0: float = 1e-2
    max_iters: int = 300
    z_ridge_uses_lambda: bool = False

    def __post_init__(self):
        if self.alpha < 0:
            raise ValidationError("alpha must be >= 0")
        if self.lam <= 0:
            raise ValidationError("lam must be > 0")
        if self.rho <= 1:
            raise ValidationError("rho must be > 1")
        if self.eps <= 0:
            raise ValidationError("eps must be > 0")
        if self.mu0 <= 0:
            raise ValidationError("mu0 must be > 0")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")


@dataclass
class AdmmState:
    """One view's iterate: representation, projection, splits, multipliers."""

    z: np.ndarray      # (n, n) self-representation
    p: np.ndarray      # (n, c) projection
    w: np.ndarray      # (n, c) orthonormal stand-in for z' p
    paux: np.ndarray   # (n, c) shadow of p
    y1: np.ndarray     # (n, c) multiplier for w - z' p
    y2: np.ndarray     # (n, c) multiplier for paux - p
    mu: float


@dataclass
class AdmmIterate:
    """Residual record for one sweep."""

    iteration: int
    res_w: float
    res_paux: float
    ortho: float
    mu: float


@dataclass
class ViewSolution:
    """Result of :func:`solve_view`: final iterate plus the residual trace.

    ``state`` is the full last iterate (multipliers and penalty included)
    and can be passed back as ``init`` to resume the solve.
    """

    z: np.ndarray
    p: np.ndarray
    trace: list[AdmmIterate]
    converged: bool
    iterations: int
    state: AdmmState | None = None


def init_state(x: np.ndarray, c: int, config: AdmmConfig) -> AdmmState:
    """Self-consistent starting point.

    ``z`` starts at the ridge self-representation, ``p`` at the leading
    left singular vectors of ``z`` rescaled so that ``p' z z' p`` is the
    identity, and ``w = z' p`` (orthonormal by that rescaling), so both
    split constraints hold exactly at the start.
    """
    gram = x.T @ x
    z = _spd_solve(gram + config.alpha * np.eye(x.shape[1]), gram,
                   what="ridge init")
    u, s, _ = np.linalg.svd(z)
    floor = max(s[0] if s.size else 0.0, 1.0) * 1e-12
    scale = np.maximum(s[:c], floor)
    p = u[:, :c] / scale[None, :]
    w = _polar(z.T @ p)
    return AdmmState(z=z, p=p, w=w, paux=p.copy(),
                     y1=np.zeros_like(p), y2=np.zeros_like(p),
                     mu=config.mu0)


def update_z(state: AdmmState, x: np.ndarray, config: AdmmConfig,
             gram: np.ndarray | None = None) -> np.ndarray:
    """Refresh the self-representation.

    Solves the normal equations of the ridge reconstruction plus the
    penalty tying ``z' p`` to ``w``:

        (x'x + ridge I + mu/2 p p') z = x'x + p (mu w' + y1') / 2
    """
    if gram is None:
        gram = x.T @ x
    ridge = config.lam if config.z_ridge_uses_lambda else config.alpha
    n = gram.shape[0]
    lhs = gram + ridge * np.eye(n) + 0.5 * state.mu * (state.p @ state.p.T)
    rhs = gram + 0.5 * state.p @ (state.mu * state.w.T + state.y1.T)
    return _spd_solve(lhs, rhs, what="z update")


def update_p(state: AdmmState) -> np.ndarray:
    """Refresh the projection: ``(z z' + I) p = z w + paux + (z y1 + y2)/mu``."""
    n = state.z.shape[0]
    lhs = state.z @ state.z.T + np.eye(n)
    rhs = (state.z @ state.w + state.paux
           + (state.z @ state.y1 + state.y2) / state.mu)
    return _spd_solve(lhs, rhs, what="p update")


def update_paux(state: AdmmState) -> np.ndarray:
    """Refresh the shadow of the projection: ``paux = p - y2 / mu``."""
    return state.p - state.y2 / state.mu


def update_w(state: AdmmState, lap: np.ndarray, config: AdmmConfig) -> np.ndarray:
    """Refresh the orthonormal coupling variable.

    Minimises ``tr(w' lap w) + eta ||w - e||^2`` over orthonormal ``w``
    with ``eta = mu / (2 lam)`` and target ``e = z' p - y1 / mu``: factor
    ``lap + eta I = r r'`` (Cholesky, lower r), take the singular vectors
    of ``e' r^{-T} r``, and compose ``w`` from them.  Singular-vector signs
    are fixed so each left vector's largest-magnitude entry is positive.
    """
    eta = state.mu / (2.0 * config.lam)
    n = lap.shape[0]
    try:
        r = scipy.linalg.cholesky(lap + eta * np.eye(n), lower=True)
    except scipy.linalg.LinAlgError as e:
        raise NumericError(f"w update: shifted Laplacian not positive definite ({e})") from e
    e_mat = state.z.T @ state.p - state.y1 / state.mu
    g = scipy.linalg.solve_triangular(r, e_mat, lower=True)
    f = g.T @ r
    u, _, vt = np.linalg.svd(f, full_matrices=False)
    u, vt = _fix_svd_signs(u, vt)
    return vt.T @ u.T


def update_multipliers(state: AdmmState, config: AdmmConfig) -> AdmmState:
    """Gradient-ascent step on both multipliers, then grow the penalty."""
    y1 = state.y1 + state.mu * (state.w - state.z.T @ state.p)
    y2 = state.y2 + state.mu * (state.paux - state.p)
    return replace(state, y1=y1, y2=y2, mu=state.mu * config.rho)


def solve_view(x: np.ndarray, lap: np.ndarray, config: AdmmConfig, c: int,
               init: AdmmState | tuple[np.ndarray, np.ndarray] | None = None,
               trace_stream: io.TextIOBase | None = None) -> ViewSolution:
    """Run the ADMM sweeps for one view until both residuals drop below eps.

    Parameters
    ----------
    x : (d, n) array
        View data, columns are instances.
    lap : (n, n) array
        Graph Laplacian shared across views.
    c : int
        Projection width (number of clusters), ``c <= n``.
    init : optional warm start
        A full :class:`AdmmState` resumes the solve where it stopped
        (multipliers and penalty carry over); a ``(z, p)`` pair re-derives
        the auxiliaries and restarts multipliers and penalty from scratch.
    trace_stream : optional text stream
        When given, one JSON line per sweep (iteration, residuals, mu).

    Returns the final iterate when both ``||w - z'p||_inf`` and
    ``||paux - p||_inf`` fall below ``config.eps``; otherwise the iterate
    with the smallest residual and ``converged=False``.
    """
    x = np.asarray(x, dtype=float)
    lap = np.asarray(lap, dtype=float)
    n = x.shape[1]
    if lap.shape != (n, n):
        raise ValidationError(
            f"Laplacian shape {lap.shape} does not match n={n}")
    if not 1 <= c <= n:
        raise ValidationError(f"need 1 <= c <= n (c={c}, n={n})")
    gram = x.T @ x
    if isinstance(init, AdmmState):
        if init.z.shape != (n, n) or init.p.shape != (n, c):
            raise ValidationError("warm start shapes do not match this view")
        state = AdmmState(z=init.z.copy(), p=init.p.copy(), w=init.w.copy(),
                          paux=init.paux.copy(), y1=init.y1.copy(),
                          y2=init.y2.copy(), mu=init.mu)
    elif init is not None:
        z0, p0 = init
        if z0.shape != (n, n) or p0.shape != (n, c):
            raise ValidationError("warm start shapes do not match this view")
        state = AdmmState(z=z0.copy(), p=p0.copy(), w=_polar(z0.T @ p0),
                          paux=p0.copy(), y1=np.zeros((n, c)),
                          y2=np.zeros((n, c)), mu=config.mu0)
    else:
        state = init_state(x, c, config)

    trace: list[AdmmIterate] = []
    converged = False
    best = (np.inf, state.z, state.p)
    eye_c = np.eye(c)
    for t in range(1, config.max_iters + 1):
        state = replace(state, z=update_z(state, x, config, gram=gram))
        state = replace(state, p=update_p(state))
        state = replace(state, paux=update_paux(state))
        state = replace(state, w=update_w(state, lap, config))

        res_w = float(np.abs(state.w - state.z.T @ state.p).max())
        res_paux = float(np.abs(state.paux - state.p).max())
        ortho = float(np.abs(state.w.T @ state.w - eye_c).max())
        rec = AdmmIterate(iteration=t, res_w=res_w, res_paux=res_paux,
                          ortho=ortho, mu=state.mu)
        trace.append(rec)
        if trace_stream is not None:
            trace_stream.write(json.dumps({
                "iteration": t, "res_w": res_w, "res_paux": res_paux,
                "ortho": ortho, "mu": state.mu}) + "\n")

        res = max(res_w, res_paux)
        if res < best[0]:
            best = (res, state.z, state.p)
        state = update_multipliers(state, config)
        if res < config.eps:
            converged = True
            break

    if converged:
        z_out, p_out = state.z, state.p
    else:
        z_out, p_out = best[1], best[2]
    return ViewSolution(z=z_out, p=p_out, trace=trace,
                        converged=converged, iterations=len(trace),
                        state=state)


def _polar(a: np.ndarray) -> np.ndarray:
    """Orthonormal polar factor (closest matrix with orthonormal columns)."""
    u, _, vt = np.linalg.svd(a, full_matrices=False)
    return u @ vt


def _fix_svd_signs(u: np.ndarray, vt: np.ndarray):
    """Flip singular-vector pairs so each u column peaks positive."""
    peak = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[peak, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs[None, :], vt * signs[:, None]


def _spd_solve(lhs: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    """Cholesky solve of a symmetric positive-definite system."""
    try:
        factor = scipy.linalg.cho_factor(lhs, lower=True)
    except scipy.linalg.LinAlgError as e:
        raise NumericError(
            f"{what}: system is singular or indefinite ({e}); "
            "a positive ridge weight usually fixes this") from e
    return scipy.linalg.cho_solve(factor, rhs)
