"""Seeded K-means over per-class latents; cluster centers are the image prototypes.

Initialization is k-means++ driven by splitmix64 so runs are reproducible
from the seed alone. Lloyd iterations use exact float64 distances; centers
are rounded to float32 (the latent dtype) after every update so prototypes
are bit-identical whether they are read from the manifest inline, from an
externalized VLPD file, or recomputed in-process.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from .interchange import LatentMatrix
from .rng import SplitMix64, derive_seed


@dataclass(frozen=True)
class KMeansParams:
    n_clusters: int
    seed: int
    max_iter: int = 300
    tol: float = 1e-6
    n_restarts: int = 1

    def __post_init__(self) -> None:
        if self.n_clusters < 1:
            raise ValueError(f"n_clusters must be >= 1, got {self.n_clusters}")
        if self.max_iter < 1 or self.n_restarts < 1:
            raise ValueError("max_iter and n_restarts must be >= 1")
        if self.tol < 0:
            raise ValueError(f"tol must be >= 0, got {self.tol}")


@dataclass
class ClusterResult:
    assignments: np.ndarray  # (n,) int64 cluster ids
    centers: np.ndarray  # (C, dim) float32
    inertia: float
    iterations_run: int


@dataclass
class ImagePrototype:
    vector: np.ndarray  # (dim,) float32 cluster center
    tensor_shape: tuple[int, ...]
    cluster_id: int
    member_count: int


def _as_points(points: LatentMatrix | np.ndarray) -> np.ndarray:
    arr = points.data if isinstance(points, LatentMatrix) else np.asarray(points)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    return arr.astype(np.float64, copy=False)


def _sq_dists_to_centers(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Exact (n, C) squared distances, one broadcast pass per center."""
    out = np.empty((x.shape[0], centers.shape[0]), dtype=np.float64)
    for c in range(centers.shape[0]):
        diff = x - centers[c]
        out[:, c] = np.einsum("ij,ij->i", diff, diff)
    return out


def kmeans_pp_init(points: LatentMatrix | np.ndarray, n_clusters: int, seed: int) -> np.ndarray:
    """k-means++ seeding: C distinct input rows chosen by D^2 weighting.

    The first center is uniform over rows; each next center is drawn with
    probability proportional to squared distance from the nearest chosen
    center. If all remaining mass is zero (duplicate-only residue), the
    lowest unchosen row index is taken.
    """
    x = _as_points(points)
    n = x.shape[0]
    if n_clusters > n:
        raise ValueError(f"n_clusters={n_clusters} exceeds available rows ({n})")
    rng = SplitMix64(seed)
    chosen = [rng.next_below(n)]
    diff = x - x[chosen[0]]
    d2 = np.einsum("ij,ij->i", diff, diff)
    while len(chosen) < n_clusters:
        total = float(d2.sum())
        if total <= 0.0:
            taken = set(chosen)
            nxt = min(i for i in range(n) if i not in taken)
        else:
            r = rng.next_double() * total
            cum = np.cumsum(d2)
            hits = np.nonzero(cum > r)[0]
            nxt = int(hits[0]) if hits.size else int(np.nonzero(d2 > 0)[0][-1])
        chosen.append(nxt)
        diff = x - x[nxt]
        d2 = np.minimum(d2, np.einsum("ij,ij->i", diff, diff))
    rows = points.data if isinstance(points, LatentMatrix) else np.asarray(points)
    if rows.ndim == 1:
        rows = rows.reshape(-1, 1)
    return rows[chosen].astype(np.float32)


def _assign_and_repair(
    x: np.ndarray, centers: np.ndarray
) -> tuple[np.ndarray, np.ndarray, float]:
    """E-step with empty-cluster repair.

    Nearest-center ties break toward the lower cluster id (argmin takes the
    first minimum). Each empty cluster, in ascending id order, is repaired
    by turning the point currently farthest from its assigned center into
    that cluster's singleton center (ties toward the lower row index).
    """
    n_clusters = centers.shape[0]
    d2 = _sq_dists_to_centers(x, centers)
    assign = np.argmin(d2, axis=1)
    point_d2 = d2[np.arange(x.shape[0]), assign]
    counts = np.bincount(assign, minlength=n_clusters)
    empties = np.nonzero(counts == 0)[0]
    if empties.size:
        centers = centers.copy()
        candidate_d2 = point_d2.copy()
        for empty_id in empties:
            # Points that are the last member of their cluster cannot move.
            candidate_d2[counts[assign] <= 1] = -1.0
            p = int(np.argmax(candidate_d2))
            counts[assign[p]] -= 1
            assign[p] = empty_id
            counts[empty_id] += 1
            centers[empty_id] = x[p]
            point_d2[p] = 0.0
            candidate_d2[p] = -1.0
    return assign, centers, float(point_d2.sum())


def _means_rounded(x: np.ndarray, assign: np.ndarray, n_clusters: int) -> np.ndarray:
    """Per-cluster means, rounded to float32 and widened back to float64.

    Rounding to the nearest float32 can only move a center closer to the
    exact mean than the previous (already-float32) center was, so Lloyd's
    inertia stays non-increasing despite the quantization.
    """
    centers = np.empty((n_clusters, x.shape[1]), dtype=np.float64)
    for c in range(n_clusters):
        centers[c] = x[assign == c].mean(axis=0)
    return centers.astype(np.float32).astype(np.float64)


def _fit_once(x: np.ndarray, params: KMeansParams, init: np.ndarray) -> ClusterResult:
    centers = init.astype(np.float64)
    prev_assign: np.ndarray | None = None
    prev_inertia = np.inf
    final_pass = False
    iterations = 0
    while iterations < params.max_iter:
        iterations += 1
        assign, centers, inertia = _assign_and_repair(x, centers)
        if inertia > prev_inertia * (1.0 + 1e-12) + 1e-12:
            raise AssertionError(
                f"inertia increased during Lloyd iteration {iterations}: "
                f"{prev_inertia} -> {inertia}"
            )
        prev_inertia = inertia
        if final_pass or (prev_assign is not None and np.array_equal(assign, prev_assign)):
            break
        prev_assign = assign
        new_centers = _means_rounded(x, assign, params.n_clusters)
        shift2 = float(((new_centers - centers) ** 2).sum(axis=1).max())
        centers = new_centers
        if shift2 < params.tol:
            final_pass = True
    return ClusterResult(
        assignments=assign.astype(np.int64),
        centers=centers.astype(np.float32),
        inertia=inertia,
        iterations_run=iterations,
    )


def kmeans_fit(
    points: LatentMatrix | np.ndarray,
    params: KMeansParams,
    init_centers: np.ndarray | None = None,
) -> ClusterResult:
    """Lloyd's algorithm from k-means++ seeding, deterministic in (points, params).

    With ``n_restarts > 1`` the restart seeds are derived from
    ``(params.seed, "restart", index)`` and the lowest-inertia result wins
    (ties toward the lower restart index). ``init_centers`` overrides
    seeding, mainly for tests.
    """
    x = _as_points(points)
    if params.n_clusters > x.shape[0]:
        raise ValueError(f"n_clusters={params.n_clusters} exceeds available rows ({x.shape[0]})")
    if init_centers is not None:
        return _fit_once(x, params, np.asarray(init_centers, dtype=np.float32))
    best: ClusterResult | None = None
    for restart in range(params.n_restarts):
        seed = params.seed if params.n_restarts == 1 else derive_seed(params.seed, "restart", restart)
        result = _fit_once(x, params, kmeans_pp_init(points, params.n_clusters, seed))
        if best is None or result.inertia < best.inertia:
            best = result
    assert best is not None
    return best


def image_prototypes(result: ClusterResult, tensor_shape: tuple[int, ...]) -> list[ImagePrototype]:
    """One prototype per cluster, in cluster-id order."""
    shape = tuple(int(s) for s in tensor_shape)
    if prod(shape) != result.centers.shape[1]:
        raise ValueError(
            f"tensor shape {shape} has product {prod(shape)}, "
            f"but centers have dim {result.centers.shape[1]}"
        )
    counts = np.bincount(result.assignments, minlength=result.centers.shape[0])
    return [
        ImagePrototype(
            vector=result.centers[c].copy(),
            tensor_shape=shape,
            cluster_id=c,
            member_count=int(counts[c]),
        )
        for c in range(result.centers.shape[0])
    ]
