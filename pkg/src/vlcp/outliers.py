"""Local Outlier Factor scoring and contamination-based removal.

Scores follow the standard LOF definitions: k-distance neighborhoods
include every point tied at the k-th distance, reachability distance is
``max(k-dist(b), d(a, b))``, local reachability density is the inverse
mean reachability over the neighborhood, and the score is the ratio of
mean neighbor density to own density. Removal takes the ``floor(alpha*n)``
highest-scoring rows per class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .interchange import LatentMatrix

# Density assigned when the mean reachability distance collapses to zero
# (duplicate points); keeps scores finite and all-equal inputs symmetric.
DENSITY_CAP = 1e12


@dataclass(frozen=True)
class LofParams:
    n_neighbors: int = 10
    contamination: float = 0.05

    def __post_init__(self) -> None:
        if self.n_neighbors < 1:
            raise ValueError(f"n_neighbors must be >= 1, got {self.n_neighbors}")
        if not 0.0 <= self.contamination <= 0.5:
            raise ValueError(f"contamination must be in [0, 0.5], got {self.contamination}")


@dataclass
class LofReport:
    """Per-sample scores plus the removed/kept row partition."""

    scores: np.ndarray
    removed: list[int]
    kept: list[int]

    def to_debug_dict(self) -> dict:
        return {
            "scores": [float(s) for s in self.scores],
            "removed": list(self.removed),
            "kept": list(self.kept),
        }


def _as_points(points: LatentMatrix | np.ndarray) -> np.ndarray:
    arr = points.data if isinstance(points, LatentMatrix) else np.asarray(points)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"points must be 2-D, got {arr.ndim}-D")
    arr = arr.astype(np.float64, copy=False)
    if not np.isfinite(arr).all():
        raise ValueError("points contain non-finite values")
    return arr


def pairwise_sq_distances(points: LatentMatrix | np.ndarray) -> np.ndarray:
    """Exact n x n squared Euclidean distances (symmetric, zero diagonal).

    Computed row-by-row as sums of squared coordinate differences rather
    than via the expanded-norm trick, so duplicates give exactly zero and
    the matrix is exactly symmetric.
    """
    x = _as_points(points)
    n = x.shape[0]
    if n < 1:
        raise ValueError("need at least one point")
    out = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        diff = x - x[i]
        out[i] = np.einsum("ij,ij->i", diff, diff)
    return out


def lof_scores(points: LatentMatrix | np.ndarray, n_neighbors: int) -> np.ndarray:
    """LOF score per row; larger means more outlying, ~1 is typical."""
    x = _as_points(points)
    n = x.shape[0]
    if n_neighbors < 1:
        raise ValueError(f"n_neighbors must be >= 1, got {n_neighbors}")
    if n <= n_neighbors:
        raise ValueError(f"need more than n_neighbors={n_neighbors} points, got {n}")

    dist = np.sqrt(pairwise_sq_distances(x))
    masked = dist.copy()
    np.fill_diagonal(masked, np.inf)
    k_dist = np.partition(masked, n_neighbors - 1, axis=1)[:, n_neighbors - 1]
    # Neighborhoods keep every point tied at the k-th distance.
    neighbors = masked <= k_dist[:, None]
    counts = neighbors.sum(axis=1)

    reach = np.maximum(dist, k_dist[None, :])
    mean_reach = np.where(neighbors, reach, 0.0).sum(axis=1) / counts
    lrd = np.full(n, DENSITY_CAP)
    positive = mean_reach > 0.0
    lrd[positive] = 1.0 / mean_reach[positive]

    neighbor_lrd = np.where(neighbors, lrd[None, :], 0.0).sum(axis=1) / counts
    return neighbor_lrd / lrd


def filter_outliers(class_points: LatentMatrix | np.ndarray, params: LofParams) -> LofReport:
    """Remove the floor(contamination * n) highest-LOF rows of one class.

    Ties are broken by removing the lower row index first. When the class
    has too few points for LOF (n <= n_neighbors) or the removal count
    floors to zero, nothing is removed and scores are reported as 1.0
    (the no-op inlier value).
    """
    x = _as_points(class_points)
    n = x.shape[0]
    if n == 0:
        raise ValueError("class_points must be non-empty")
    n_remove = math.floor(params.contamination * n) if n > params.n_neighbors else 0
    if n > params.n_neighbors:
        scores = lof_scores(x, params.n_neighbors)
    else:
        scores = np.ones(n)
    order = np.lexsort((np.arange(n), -scores))
    removed = sorted(int(i) for i in order[:n_remove])
    kept = sorted(int(i) for i in order[n_remove:])
    return LofReport(scores=scores, removed=removed, kept=kept)
