"""
Two-dimensional projections of embedding groups.

Records are flattened to one vector each (mean-pooled over tokens when the
groups disagree on sequence length), centered jointly, and projected onto
the two leading principal directions. The directions come from power
iteration with deflation on the implicit covariance X^T X / (n - 1), so the
covariance matrix is never formed.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np
from scipy.spatial.distance import cdist

from gluenet.common.config import get_config
from gluenet.common.errors import DimensionError, EmptyBatchError, NumericError

log = logging.getLogger(__name__)

MIN_RECORDS = 3
N_COMPONENTS = 2


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    points: np.ndarray
    labels: np.ndarray
    explained_variance: np.ndarray
    explained_variance_ratio: Optional[np.ndarray] = None
    components: Optional[np.ndarray] = None
    pooled: bool = False

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def group(self, label: str) -> np.ndarray:
        return self.points[self.labels == label]


def _group_vectors(groups: Mapping[str, np.ndarray]) -> tuple[np.ndarray, np.ndarray, bool]:
    arrays = {}
    for label, records in groups.items():
        arr = np.asarray(getattr(records, "records", records), dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[None]
        if arr.ndim != 3:
            raise DimensionError(f"group {label!r}: expected (n, L, C) records, got {arr.shape}")
        arrays[label] = arr

    if len({arr.shape[2] for arr in arrays.values()}) > 1:
        raise DimensionError("groups must share the channel dimension C")
    pooled = len({arr.shape[1] for arr in arrays.values()}) > 1

    vectors, labels = [], []
    for label, arr in arrays.items():
        flat = arr.mean(axis=1) if pooled else arr.reshape(arr.shape[0], -1)
        vectors.append(flat)
        labels.extend([label] * arr.shape[0])
    return np.concatenate(vectors, axis=0), np.array(labels, dtype=object), pooled


def _fallback_direction(d: int, basis: list[np.ndarray]) -> np.ndarray:
    """A unit vector orthogonal to ``basis`` for directions without variance."""
    for i in range(d):
        v = np.zeros(d)
        v[i] = 1.0
        for b in basis:
            v -= (b @ v) * b
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            return v / norm
    raise NumericError("no direction left orthogonal to the principal basis")


def power_directions(
    X: np.ndarray,
    k: int = N_COMPONENTS,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Leading ``k`` eigenpairs of X^T X / (n - 1) for centered ``X``.

    Returns (components (k, d), variances (k,)), variances sorted descending.
    The start vector is drawn from a fixed seed so results are reproducible.
    """
    config = get_config()
    tol = config.get('diagnostics.power_tol', 1e-7) if tol is None else tol
    max_iter = config.get('diagnostics.power_max_iter', 1000) if max_iter is None else max_iter

    n, d = X.shape
    scale = 1.0 / (n - 1)
    rng = np.random.default_rng(0)
    basis: list[np.ndarray] = []
    variances: list[float] = []

    def cov(v):
        return X.T @ (X @ v) * scale

    def deflate(v):
        for b in basis:
            v = v - (b @ v) * b
        return v

    for _ in range(min(k, d)):
        v = deflate(rng.standard_normal(d))
        v /= np.linalg.norm(v)
        for iteration in range(1, max_iter + 1):
            w = deflate(cov(v))
            norm = np.linalg.norm(w)
            if norm <= 1e-300:
                v = _fallback_direction(d, basis)
                break
            w /= norm
            if w @ v < 0:
                w = -w
            converged = np.linalg.norm(w - v) < tol
            v = w
            if converged:
                break
        else:
            log.debug(f"power iteration stopped at max_iter={max_iter} for component {len(basis)}")
        v = deflate(v)
        v /= np.linalg.norm(v)
        basis.append(v)
        variances.append(float(v @ cov(v)))

    while len(basis) < k:
        basis.append(_fallback_direction(d, basis))
        variances.append(0.0)

    order = np.argsort(-np.asarray(variances), kind="stable")
    components = np.stack([basis[i] for i in order])
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return components, np.asarray(variances)[order]


def pca_project(groups: Mapping[str, np.ndarray]) -> ProjectionResult:
    """
    Joint 2-D projection of named groups of token sequences.

    ``groups`` maps a label (e.g. source / translated / target) to an
    (n, L, C) array or an EmbeddingStore.
    """
    X, labels, pooled = _group_vectors(groups)
    if X.shape[0] < MIN_RECORDS:
        raise EmptyBatchError(f"projection needs at least {MIN_RECORDS} records, got {X.shape[0]}")

    Xc = X - X.mean(axis=0)
    total_variance = float(np.sum(Xc * Xc) / (X.shape[0] - 1))
    if total_variance == 0.0:
        raise NumericError("projection input has zero variance")

    components, variances = power_directions(Xc)
    points = Xc @ components.T
    result = ProjectionResult(
        points=points,
        labels=labels,
        explained_variance=variances,
        explained_variance_ratio=variances / total_variance,
        components=components,
        pooled=pooled,
    )
    log.info(f"Projected {X.shape[0]} records ({X.shape[1]}-dim{', token-pooled' if pooled else ''}); "
             f"explained variance ratio {np.round(result.explained_variance_ratio, 4).tolist()}")
    return result


def pair_separation_ratio(result: ProjectionResult, group_a: str, group_b: str) -> float:
    """
    Mean distance between matched pairs (a[i], b[i]) divided by the mean
    distance between unmatched pairs (a[i], b[j]), i != j.
    """
    a, b = result.group(group_a), result.group(group_b)
    if a.shape != b.shape or a.shape[0] < 2:
        raise DimensionError(
            f"groups {group_a!r} and {group_b!r} need equal sizes of at least 2, got {len(a)} and {len(b)}"
        )
    distances = cdist(a, b)
    n = distances.shape[0]
    matched = float(np.trace(distances) / n)
    unmatched = float((distances.sum() - np.trace(distances)) / (n * (n - 1)))
    if unmatched == 0.0:
        raise NumericError("unmatched pairs coincide; separation ratio is undefined")
    return matched / unmatched
