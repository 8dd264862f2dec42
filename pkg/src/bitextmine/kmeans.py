"""Seeded k-means with kmeans++ initialization.

Used for the coarse quantizer and, per subspace, for product-quantizer
codebooks. Distances are computed in float64; ties in assignment go to the
lower centroid index, which keeps runs bit-reproducible for a given seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientData

DEFAULT_ITERS = 20
_CHUNK = 8192


@dataclass
class KMeansResult:
    centroids: np.ndarray  # (k, d) float32
    inertia: list = field(default_factory=list)  # objective after each assignment

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


def assign_nearest(data: np.ndarray, centroids: np.ndarray, chunk: int = _CHUNK):
    """Nearest-centroid label per row, plus the squared distance.

    Returns ``(labels int64, sqdist float64)``. Works in chunks so large
    inputs never materialize the full (n, k) distance matrix at once.
    """
    x64 = np.asarray(data, dtype=np.float64)
    c64 = np.asarray(centroids, dtype=np.float64)
    c_sq = np.einsum("ij,ij->i", c64, c64)
    n = x64.shape[0]
    labels = np.empty(n, dtype=np.int64)
    sqdist = np.empty(n, dtype=np.float64)
    for start in range(0, n, chunk):
        block = x64[start : start + chunk]
        # ||x - c||^2 = ||x||^2 + ||c||^2 - 2 x.c; drop ||x||^2 for the argmin
        partial = c_sq[None, :] - 2.0 * (block @ c64.T)
        best = np.argmin(partial, axis=1)
        labels[start : start + chunk] = best
        x_sq = np.einsum("ij,ij->i", block, block)
        picked = partial[np.arange(block.shape[0]), best] + x_sq
        sqdist[start : start + chunk] = np.maximum(picked, 0.0)
    return labels, sqdist


def _kmeans_pp_init(x64: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x64.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    d2 = np.sum((x64 - x64[chosen[0]]) ** 2, axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # all remaining mass at zero distance: fall back to uniform
            chosen[i] = rng.integers(n)
        else:
            r = rng.random() * total
            chosen[i] = int(np.searchsorted(np.cumsum(d2), r, side="right"))
        d2 = np.minimum(d2, np.sum((x64 - x64[chosen[i]]) ** 2, axis=1))
    return x64[chosen].copy()


def _reseed_empty(x64, centroids, labels, sqdist, empties, rng):
    """Move each empty centroid to the farthest point of the largest cluster."""
    for c in empties:
        counts = np.bincount(labels, minlength=centroids.shape[0])
        donor = int(np.argmax(counts))
        members = np.flatnonzero(labels == donor)
        far = members[int(np.argmax(sqdist[members]))]
        centroids[c] = x64[far]
        labels[far] = c
        sqdist[far] = 0.0


def kmeans_fit(
    data: np.ndarray, k: int, n_iter: int = DEFAULT_ITERS, seed: int = 0
) -> KMeansResult:
    """Lloyd's algorithm for ``n_iter`` rounds (early exit on convergence)."""
    x64 = np.asarray(data, dtype=np.float64)
    n = x64.shape[0]
    if n < k:
        raise InsufficientData(f"{n} points cannot seed {k} clusters")
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(x64, k, rng)
    inertia: list = []
    prev_labels = None
    for _ in range(n_iter):
        labels, sqdist = assign_nearest(x64, centroids)
        empties = np.flatnonzero(np.bincount(labels, minlength=k) == 0)
        if empties.size:
            _reseed_empty(x64, centroids, labels, sqdist, empties, rng)
        inertia.append(float(sqdist.sum()))
        if prev_labels is not None and np.array_equal(labels, prev_labels):
            break
        prev_labels = labels
        for c in range(k):
            members = labels == c
            if members.any():
                centroids[c] = x64[members].mean(axis=0)
    return KMeansResult(centroids=centroids.astype(np.float32), inertia=inertia)
