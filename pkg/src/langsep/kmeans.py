"""Seeded k-means++ with Lloyd iterations, deterministic by construction.

Runs in double precision with blocked distance computation so memory stays
O(chunk * k). Determinism comes from the caller-supplied RandomStream and
fixed iteration order; assignment ties go to the lower centroid index.
"""

from dataclasses import dataclass

import numpy as np

from langsep.separability import blocked_sq_dists

DEFAULT_MAX_ITERS = 100
DEFAULT_TOL = 1e-6

_CHUNK = 1024


@dataclass(frozen=True)
class KMeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    inertia_history: tuple
    iterations: int
    converged: bool


def _assign(points, sq_norms, centroids):
    """Labels and squared distances to the nearest centroid, chunked."""
    n = points.shape[0]
    labels = np.empty(n, dtype=np.int64)
    best = np.empty(n, dtype=np.float64)
    cent_sq = np.einsum("ij,ij->i", centroids, centroids)
    for start in range(0, n, _CHUNK):
        chunk = slice(start, min(start + _CHUNK, n))
        d2 = blocked_sq_dists(points[chunk], centroids,
                              rows_sq_norms=sq_norms[chunk],
                              cols_sq_norms=cent_sq)
        labels[chunk] = np.argmin(d2, axis=1)
        best[chunk] = d2[np.arange(d2.shape[0]), labels[chunk]]
    return labels, best


def _plusplus_init(points, sq_norms, k, stream):
    """Classic k-means++ seeding: D^2-weighted draws from the stream."""
    n = points.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = stream.randbelow(n)
    min_d2 = blocked_sq_dists(points[chosen[0]:chosen[0] + 1], points,
                              cols_sq_norms=sq_norms)[0]
    taken = {int(chosen[0])}
    for c in range(1, k):
        total = float(min_d2.sum())
        if total > 0.0:
            r = stream.uniform() * total
            idx = int(np.searchsorted(np.cumsum(min_d2), r, side="right"))
            idx = min(idx, n - 1)
        else:
            # All remaining mass sits on already-chosen points (duplicates):
            # fall back to the smallest unused index.
            idx = next(i for i in range(n) if i not in taken)
        chosen[c] = idx
        taken.add(int(idx))
        d2 = blocked_sq_dists(points[idx:idx + 1], points,
                              cols_sq_norms=sq_norms)[0]
        np.minimum(min_d2, d2, out=min_d2)
    return points[chosen].astype(np.float64)


def kmeans(points, k, stream, max_iters=DEFAULT_MAX_ITERS, tol=DEFAULT_TOL):
    """Lloyd iterations until the max centroid shift drops below tol."""
    points = np.asarray(points)
    n, d = points.shape
    if not 0 < k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    sq_norms = np.einsum("ij,ij->i", points.astype(np.float64),
                         points.astype(np.float64))
    centroids = _plusplus_init(points, sq_norms, k, stream)

    history = []
    converged = False
    iterations = 0
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(max_iters):
        iterations += 1
        labels, d2 = _assign(points, sq_norms, centroids)
        inertia = float(d2.sum())
        # Lloyd monotonicity (modulo floating-point jitter).
        assert not history or inertia <= history[-1] * (1 + 1e-12) + 1e-12
        history.append(inertia)

        sums = np.zeros((k, d), dtype=np.float64)
        counts = np.bincount(labels, minlength=k).astype(np.float64)
        for start in range(0, n, _CHUNK):
            chunk = slice(start, min(start + _CHUNK, n))
            np.add.at(sums, labels[chunk], points[chunk].astype(np.float64))
        new_centroids = centroids.copy()
        nonempty = counts > 0
        new_centroids[nonempty] = sums[nonempty] / counts[nonempty, None]

        empty = np.flatnonzero(~nonempty)
        if empty.size:
            # Relocate each empty centroid onto the point currently farthest
            # from its assigned centroid (ties -> smaller index).
            order = np.lexsort((np.arange(n), -d2))
            used = 0
            for centroid_idx in empty:
                new_centroids[centroid_idx] = points[order[used]].astype(np.float64)
                used += 1

        shift = float(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max())
        centroids = new_centroids
        if shift < tol:
            converged = True
            break

    labels, d2 = _assign(points, sq_norms, centroids)
    return KMeansResult(
        centroids=centroids,
        labels=labels,
        inertia_history=tuple(history),
        iterations=iterations,
        converged=converged,
    )
