"""Seeded k-means++ / Lloyd clustering.

Deterministic for a fixed seed: the best of a fixed number of restarts by
within-cluster sum of squares, ties to the earliest restart.
"""

from __future__ import annotations

import numpy as np

TOL = 1e-6
MAX_ITER = 100
RESTARTS = 10


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    idx = rng.integers(n)
    centers[0] = points[idx]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=d2 / total)
        centers[j] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centers[j]) ** 2, axis=1))
    return centers


def _lloyd(points: np.ndarray, centers: np.ndarray, rng: np.random.Generator):
    k = centers.shape[0]
    for _ in range(MAX_ITER):
        dists = np.linalg.norm(points[:, None, :] - centers[None, :, :], axis=2)
        labels = np.argmin(dists, axis=1)
        new_centers = centers.copy()
        for j in range(k):
            members = points[labels == j]
            if len(members) == 0:
                # reseed an empty cluster at the point farthest from its center
                far = int(np.argmax(np.min(dists, axis=1)))
                new_centers[j] = points[far]
            else:
                new_centers[j] = members.mean(axis=0)
        shift = float(np.max(np.linalg.norm(new_centers - centers, axis=1)))
        centers = new_centers
        if shift < TOL:
            break
    dists = np.linalg.norm(points[:, None, :] - centers[None, :, :], axis=2)
    labels = np.argmin(dists, axis=1)
    wcss = float(np.sum((points - centers[labels]) ** 2))
    return labels, centers, wcss


def kmeans(points: np.ndarray, k: int, seed: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Returns (labels, centroids, within-cluster sum of squares)."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be a 2-D array")
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for {n} points")
    if not np.all(np.isfinite(points)):
        raise ValueError("non-finite input")
    best = None
    for restart in range(RESTARTS):
        rng = np.random.default_rng(np.uint64(seed) + np.uint64(restart))
        centers = _kmeanspp_init(points, k, rng)
        labels, centers, wcss = _lloyd(points, centers, rng)
        if best is None or wcss < best[2] - 1e-12:
            best = (labels, centers, wcss)
    return best
