"""Multi-view dataset container, file formats, and synthetic data generation.

A dataset is a list of per-view feature matrices over a shared set of
instances.  Each view is a dense ``(d_v, n)`` float array whose columns are
instances, so every view has the same column count ``n``.  Optional integer
labels assign each instance to a class.

On-disk layout
--------------
A dataset is described by a JSON manifest::

    {"views": ["view_00.csv", "view_01.csv"], "labels": "labels.csv"}

View paths are resolved relative to the manifest's directory.  Each view
file is plain CSV with one row per feature dimension, comma-separated
decimal floats and no header.  The labels file holds one integer per line;
``"labels": null`` marks an unlabeled dataset.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError


@dataclass
class MultiViewDataset:
    """Per-view feature matrices (columns are instances) plus optional labels."""

    views: list[np.ndarray]
    labels: np.ndarray | None = None

    def __post_init__(self):
        if not self.views:
            raise ValidationError("dataset needs at least one view")
        views = []
        for i, v in enumerate(self.views):
            v = np.asarray(v, dtype=float)
            if v.ndim != 2:
                raise ValidationError(f"view {i} is not a 2-d matrix")
            if not np.all(np.isfinite(v)):
                raise ValidationError(f"view {i} contains non-finite entries")
            views.append(v)
        n = views[0].shape[1]
        for i, v in enumerate(views):
            if v.shape[1] != n:
                raise ValidationError(
                    f"view {i} has {v.shape[1]} columns, expected {n}"
                )
        self.views = views
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64).ravel()
            if labels.shape[0] != n:
                raise ValidationError(
                    f"labels length {labels.shape[0]} does not match n={n}"
                )
            self.labels = labels

    @property
    def n(self) -> int:
        """Number of instances."""
        return self.views[0].shape[1]

    @property
    def n_views(self) -> int:
        return len(self.views)


@dataclass
class SyntheticSpec:
    """Recipe for a synthetic multi-view Gaussian-mixture dataset.

    ``mean_separation`` is the per-coordinate offset between adjacent
    component means along a rotated all-ones vector, so adjacent means are
    ``mean_separation * sqrt(dim)`` apart in Euclidean distance while the
    noise has unit variance per coordinate.  ``corruption_fraction`` is the
    fraction of columns per view that receive additive Gaussian noise whose
    per-entry variance is ``noise_sigma_scale`` times the column's 2-norm.
    """

    n: int
    views: int = 3
    clusters: int = 2
    mean_separation: float = 4.0
    noise_sigma_scale: float = 0.3
    corruption_fraction: float = 0.0
    seed: int = 0
    dim: int = 6

    def __post_init__(self):
        if self.n < self.clusters:
            raise ValidationError("need at least one instance per cluster")
        if self.views < 1:
            raise ValidationError("views must be >= 1")
        if self.clusters < 2:
            raise ValidationError("clusters must be >= 2")
        if not 0.0 <= self.corruption_fraction <= 1.0:
            raise ValidationError("corruption_fraction must lie in [0, 1]")
        if self.noise_sigma_scale < 0:
            raise ValidationError("noise_sigma_scale must be >= 0")
        if self.dim < 1:
            raise ValidationError("dim must be >= 1")


def load_dataset(manifest_path) -> MultiViewDataset:
    """Read a dataset from a JSON manifest (see module docstring for layout)."""
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise ValidationError(f"manifest not found: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as e:
        raise ValidationError(f"manifest is not valid JSON: {e}") from e
    view_names = manifest.get("views")
    if not isinstance(view_names, list) or not view_names:
        raise ValidationError("manifest must list at least one view")
    base = manifest_path.parent
    views = [_read_matrix_csv(base / name) for name in view_names]
    labels = None
    label_name = manifest.get("labels")
    if label_name is not None:
        labels = _read_labels_csv(base / label_name)
    try:
        return MultiViewDataset(views=views, labels=labels)
    except ValidationError as e:
        raise ValidationError(f"{manifest_path}: {e}") from e


def save_dataset(data: MultiViewDataset, out_dir) -> Path:
    """Write views, labels, and a manifest into ``out_dir``; return manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    view_names = []
    for i, v in enumerate(data.views):
        name = f"view_{i:02d}.csv"
        np.savetxt(out_dir / name, v, delimiter=",", fmt="%.17g")
        view_names.append(name)
    label_name = None
    if data.labels is not None:
        label_name = "labels.csv"
        np.savetxt(out_dir / label_name, data.labels, fmt="%d")
    manifest = {"views": view_names, "labels": label_name}
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest_path


def generate_synthetic(spec: SyntheticSpec) -> MultiViewDataset:
    """Sample a labeled Gaussian-mixture dataset, one mixture per view.

    Component means sit on a line through the origin (a per-view random
    rotation of the all-ones vector), with consecutive means offset by
    ``mean_separation`` along that vector, and identity covariance.  For
    two clusters this puts the means at ``+/-(mean_separation / 2)`` times
    the rotated all-ones vector.  Component sizes differ by at most one
    and the instance order is shuffled.  Everything is deterministic given
    the seed.
    """
    rng = np.random.default_rng(spec.seed)
    n, c, dim = spec.n, spec.clusters, spec.dim
    sizes = [n // c + (1 if i < n % c else 0) for i in range(c)]
    labels = np.repeat(np.arange(c), sizes)
    labels = labels[rng.permutation(n)]
    views = []
    base_dir = np.ones(dim)
    for _ in range(spec.views):
        rot = _random_rotation(rng, dim)
        direction = rot @ base_dir
        offsets = (np.arange(c) - (c - 1) / 2.0) * spec.mean_separation
        centers = offsets[:, None] * direction[None, :]  # (c, dim)
        x = centers[labels].T + rng.standard_normal((dim, n))
        views.append(x)
    data = MultiViewDataset(views=views, labels=labels)
    if spec.corruption_fraction > 0:
        sub_seed = int(rng.integers(0, 2**63 - 1))
        data = corrupt(data, spec.corruption_fraction, spec.noise_sigma_scale,
                       seed=sub_seed)
    return data


def corrupt(data: MultiViewDataset, fraction: float, sigma_scale: float = 0.3,
            seed: int = 0) -> MultiViewDataset:
    """Return a copy with ``floor(fraction * n)`` noisy columns per view.

    Column subsets are drawn independently per view.  A corrupted column x
    gets zero-mean Gaussian noise with per-entry variance
    ``sigma_scale * ||x||_2``.  ``fraction = 0`` returns an exact copy.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValidationError("fraction must lie in [0, 1]")
    if sigma_scale < 0:
        raise ValidationError("sigma_scale must be >= 0")
    rng = np.random.default_rng(seed)
    n = data.n
    m = int(np.floor(fraction * n + 1e-9))
    views = []
    for v in data.views:
        v = v.copy()
        if m > 0:
            idx = rng.choice(n, size=m, replace=False)
            norms = np.linalg.norm(v[:, idx], axis=0)
            std = np.sqrt(sigma_scale * norms)
            v[:, idx] += rng.standard_normal((v.shape[0], m)) * std[None, :]
        views.append(v)
    labels = None if data.labels is None else data.labels.copy()
    return MultiViewDataset(views=views, labels=labels)


def _read_matrix_csv(path: Path) -> np.ndarray:
    if not path.is_file():
        raise ValidationError(f"view file not found: {path}")
    try:
        mat = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except ValueError as e:
        raise ValidationError(f"{path}: non-numeric or ragged CSV ({e})") from e
    if mat.size == 0:
        raise ValidationError(f"{path}: empty view file")
    return mat


def _read_labels_csv(path: Path) -> np.ndarray:
    if not path.is_file():
        raise ValidationError(f"labels file not found: {path}")
    try:
        return np.loadtxt(path, dtype=np.int64, ndmin=1)
    except ValueError as e:
        raise ValidationError(f"{path}: labels must be one integer per line ({e})") from e


def _random_rotation(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-ish random orthogonal matrix via sign-fixed QR."""
    m = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(m)
    q = q * np.sign(np.diag(r))
    return q
