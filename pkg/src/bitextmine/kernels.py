"""Hot numeric kernels: numba-jitted with a pure-numpy fallback.

The jitted path is used when numba imports cleanly and the environment
variable ``BITEXTMINE_NO_NUMBA`` is unset; setting it to ``1`` forces the
numpy path. Both paths accumulate in float64, so they agree to ~1e-13 and
produce identical rankings on non-degenerate data. ``benchmarks/bench_kernels.py``
times one against the other.
"""
from __future__ import annotations

import os

import numpy as np

ENV_FLAG = "BITEXTMINE_NO_NUMBA"

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False


def numba_enabled() -> bool:
    """True when the jitted kernels are selected for this process."""
    if os.environ.get(ENV_FLAG, "").strip().lower() in ("1", "true", "yes"):
        return False
    return HAS_NUMBA


def adc_accumulate_numpy(codes: np.ndarray, lut: np.ndarray) -> np.ndarray:
    """Sum per-subspace lookup-table entries selected by each code row.

    codes: (n, m) uint8; lut: (m, 256) float64 -> (n,) float64 scores.
    """
    m = lut.shape[0]
    return lut[np.arange(m), codes].sum(axis=1)


def encode_subspace_numpy(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Nearest-centroid code per row of ``x``; ties go to the lower code."""
    x64 = x.astype(np.float64)
    c64 = centroids.astype(np.float64)
    scores = np.einsum("ij,ij->i", c64, c64)[None, :] - 2.0 * (x64 @ c64.T)
    return np.argmin(scores, axis=1).astype(np.uint8)


if HAS_NUMBA:

    @njit(cache=True, nogil=True)
    def _adc_accumulate_jit(codes, lut):  # pragma: no cover - exercised via wrapper
        n, m = codes.shape
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            acc = 0.0
            for j in range(m):
                acc += lut[j, codes[i, j]]
            out[i] = acc
        return out

    @njit(cache=True, nogil=True)
    def _encode_subspace_jit(x, centroids):  # pragma: no cover - exercised via wrapper
        n, sub_dim = x.shape
        k = centroids.shape[0]
        sqnorm = np.empty(k, dtype=np.float64)
        for c in range(k):
            acc = 0.0
            for j in range(sub_dim):
                acc += centroids[c, j] * centroids[c, j]
            sqnorm[c] = acc
        codes = np.empty(n, dtype=np.uint8)
        for i in range(n):
            best = np.inf
            best_c = 0
            for c in range(k):
                dot = 0.0
                for j in range(sub_dim):
                    dot += x[i, j] * centroids[c, j]
                score = sqnorm[c] - 2.0 * dot
                if score < best:
                    best = score
                    best_c = c
            codes[i] = best_c
        return codes


def adc_accumulate(codes: np.ndarray, lut: np.ndarray) -> np.ndarray:
    if numba_enabled():
        return _adc_accumulate_jit(codes, lut)
    return adc_accumulate_numpy(codes, lut)


def encode_subspace(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    if numba_enabled():
        return _encode_subspace_jit(
            np.ascontiguousarray(x, dtype=np.float64),
            np.ascontiguousarray(centroids, dtype=np.float64),
        )
    return encode_subspace_numpy(x, centroids)


def scan_probed(
    codes: np.ndarray,
    offsets: np.ndarray,
    probes: np.ndarray,
    bases: np.ndarray,
    lut: np.ndarray,
) -> np.ndarray:
    """ADC scores for every entry of the probed inverted lists, concatenated
    in probe order. ``bases[t]`` is added to every score of list ``probes[t]``
    (the query-centroid inner product in residual mode)."""
    parts = []
    for t, lst in enumerate(probes):
        start, end = int(offsets[lst]), int(offsets[lst + 1])
        if end > start:
            parts.append(adc_accumulate(codes[start:end], lut) + bases[t])
    if not parts:
        return np.empty(0, dtype=np.float64)
    return np.concatenate(parts)
