"""Product quantization: per-subspace 256-centroid codebooks, 8-bit codes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionMismatch, DimensionNotDivisible, InsufficientData

CODES_PER_SUBSPACE = 256


@dataclass(frozen=True)
class PQCodebook:
    codebooks: np.ndarray  # (m, 256, sub_dim) float32

    def __post_init__(self):
        if self.codebooks.ndim != 3 or self.codebooks.shape[1] != CODES_PER_SUBSPACE:
            raise DimensionMismatch(
                f"expected (m, {CODES_PER_SUBSPACE}, sub_dim) codebooks, "
                f"got shape {self.codebooks.shape}"
            )

    @property
    def m(self) -> int:
        return self.codebooks.shape[0]

    @property
    def sub_dim(self) -> int:
        return self.codebooks.shape[2]

    @property
    def dim(self) -> int:
        return self.m * self.sub_dim


def train_pq(
    data: np.ndarray, m: int, n_iter: int = 20, seed: int = 0
) -> PQCodebook:
    """Fit one 256-centroid codebook per subspace slice of ``data``."""
    x = np.asarray(data)
    n, d = x.shape
    if d % m != 0:
        raise DimensionNotDivisible(f"dim {d} is not divisible by m={m}")
    if n < CODES_PER_SUBSPACE:
        raise InsufficientData(
            f"{n} training rows < {CODES_PER_SUBSPACE} codes per subspace"
        )
    sub_dim = d // m
    from .kmeans import kmeans_fit

    books = np.empty((m, CODES_PER_SUBSPACE, sub_dim), dtype=np.float32)
    for j in range(m):
        sub = x[:, j * sub_dim : (j + 1) * sub_dim]
        books[j] = kmeans_fit(sub, CODES_PER_SUBSPACE, n_iter=n_iter, seed=seed + j).centroids
    return PQCodebook(codebooks=books)


def encode(codebook: PQCodebook, data: np.ndarray) -> np.ndarray:
    """Quantize rows to (n, m) uint8 codes; ties go to the lower code."""
    x = np.asarray(data)
    if x.shape[1] != codebook.dim:
        raise DimensionMismatch(
            f"data dim {x.shape[1]} != codebook dim {codebook.dim}"
        )
    n = x.shape[0]
    sub_dim = codebook.sub_dim
    codes = np.empty((n, codebook.m), dtype=np.uint8)
    for j in range(codebook.m):
        sub = x[:, j * sub_dim : (j + 1) * sub_dim]
        codes[:, j] = kernels.encode_subspace(sub, codebook.codebooks[j])
    return codes


def decode(codebook: PQCodebook, codes: np.ndarray) -> np.ndarray:
    """Reconstruct (n, dim) float32 vectors from codes."""
    codes = np.asarray(codes)
    n = codes.shape[0]
    out = np.empty((n, codebook.dim), dtype=np.float32)
    sub_dim = codebook.sub_dim
    for j in range(codebook.m):
        out[:, j * sub_dim : (j + 1) * sub_dim] = codebook.codebooks[j][codes[:, j]]
    return out


def adc_table(codebook: PQCodebook, query: np.ndarray) -> np.ndarray:
    """(m, 256) float64 table of inner products between query slices and codes."""
    q64 = np.asarray(query, dtype=np.float64)
    if q64.shape[0] != codebook.dim:
        raise DimensionMismatch(f"query dim {q64.shape[0]} != {codebook.dim}")
    sub_dim = codebook.sub_dim
    lut = np.empty((codebook.m, CODES_PER_SUBSPACE), dtype=np.float64)
    for j in range(codebook.m):
        lut[j] = codebook.codebooks[j].astype(np.float64) @ q64[j * sub_dim : (j + 1) * sub_dim]
    return lut
