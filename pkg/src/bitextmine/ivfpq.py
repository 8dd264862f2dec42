"""IVF-PQ approximate index over unit-normalized sentence embeddings.

Vectors are assigned to their nearest coarse centroid (Euclidean) and stored
as product-quantizer codes, of the residual against that centroid by default
or of the raw vector when ``residual=False``. Queries probe the ``p`` nearest
coarse lists and rank candidates by asymmetric-distance (ADC) inner product,
accumulated in float64 via the kernels module. Callers re-score shortlisted
hits exactly; the index only promises good recall, not exact scores.

Ties are deterministic: equal coarse distances probe the lower list index
first, and equal candidate scores rank the lexicographically lower sent_id
first.
"""
from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels, pq
from .embeddings import EmbeddingMatrix
from .errors import (
    DimensionMismatch,
    DuplicateId,
    EmptyIndex,
    FormatError,
    TruncatedFile,
)
from .kmeans import assign_nearest, kmeans_fit
from .pq import PQCodebook

MAGIC = b"SIVF"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIB")  # magic, version, dim, K, m, residual


@dataclass(frozen=True)
class SearchHit:
    sent_id: str
    approx_score: float  # ADC estimate for index search, exact for exact_search


def default_k_clusters(n: int) -> int:
    """sqrt(n) heuristic, floored at 16 so tiny corpora still shard."""
    return max(16, int(round(np.sqrt(max(n, 1)))))


def train_coarse(
    vectors: np.ndarray, k_clusters: int, n_iter: int = 20, seed: int = 0
) -> np.ndarray:
    """Coarse quantizer centroids, (K, d) float32."""
    return kmeans_fit(vectors, k_clusters, n_iter=n_iter, seed=seed).centroids


def _select_hits(scores: np.ndarray, id_of, k: int):
    """Top-k by score with sent_id breaking exact ties, as SearchHit list."""
    n = scores.shape[0]
    if n == 0:
        return []
    kk = min(k, n)
    if kk < n:
        # keep every row tied with the k-th score so the id tiebreak sees them
        thresh = np.partition(scores, n - kk)[n - kk]
        cand = np.flatnonzero(scores >= thresh)
    else:
        cand = np.arange(n)
    ranked = sorted((-float(scores[i]), id_of(int(i))) for i in cand)
    return [SearchHit(sent_id=sid, approx_score=-neg) for neg, sid in ranked[:kk]]


class IvfPqIndex:
    def __init__(
        self,
        coarse_centroids: np.ndarray,
        codebook: PQCodebook,
        residual: bool = True,
    ):
        coarse = np.ascontiguousarray(coarse_centroids, dtype=np.float32)
        if coarse.ndim != 2:
            raise DimensionMismatch("coarse centroids must be a (K, d) matrix")
        if coarse.shape[1] != codebook.dim:
            raise DimensionMismatch(
                f"coarse dim {coarse.shape[1]} != codebook dim {codebook.dim}"
            )
        self.coarse = coarse
        self.codebook = codebook
        self.residual = bool(residual)
        self._coarse64 = coarse.astype(np.float64)
        self._coarse_sq = np.einsum("ij,ij->i", self._coarse64, self._coarse64)
        self.ids: list = []
        self._id_set: set = set()
        self._pending_rows = [[] for _ in range(self.k_clusters)]
        self._pending_codes = [[] for _ in range(self.k_clusters)]
        self._codes = np.empty((0, codebook.m), dtype=np.uint8)
        self._rows = np.empty(0, dtype=np.int64)
        self._offsets = np.zeros(self.k_clusters + 1, dtype=np.int64)
        self._dirty = False

    @property
    def dim(self) -> int:
        return self.coarse.shape[1]

    @property
    def k_clusters(self) -> int:
        return self.coarse.shape[0]

    @property
    def m(self) -> int:
        return self.codebook.m

    @property
    def total(self) -> int:
        return len(self.ids)

    def add(self, matrix: EmbeddingMatrix) -> None:
        """Assign, encode, and append every row of ``matrix``."""
        if matrix.count == 0:
            return
        if matrix.dim != self.dim:
            raise DimensionMismatch(f"matrix dim {matrix.dim} != index dim {self.dim}")
        for sid in matrix.ids:
            if sid in self._id_set:
                raise DuplicateId(f"sent_id already indexed: {sid}")
            self._id_set.add(sid)
        base = len(self.ids)
        self.ids.extend(matrix.ids)
        labels, _ = assign_nearest(matrix.vectors, self._coarse64)
        x64 = matrix.vectors.astype(np.float64)
        if self.residual:
            x64 = x64 - self._coarse64[labels]
        codes = pq.encode(self.codebook, x64)
        for lst in np.unique(labels):
            members = np.flatnonzero(labels == lst)
            self._pending_rows[lst].append(members + base)
            self._pending_codes[lst].append(codes[members])
        self._dirty = True

    def _seal(self) -> None:
        if not self._dirty:
            return
        rows_parts, codes_parts = [], []
        offsets = np.zeros(self.k_clusters + 1, dtype=np.int64)
        for lst in range(self.k_clusters):
            parts_r = ([self._rows[self._offsets[lst] : self._offsets[lst + 1]]]
                       + self._pending_rows[lst])
            parts_c = ([self._codes[self._offsets[lst] : self._offsets[lst + 1]]]
                       + self._pending_codes[lst])
            rows_parts.append(np.concatenate(parts_r))
            codes_parts.append(np.concatenate(parts_c))
            offsets[lst + 1] = offsets[lst] + rows_parts[-1].shape[0]
        self._rows = np.concatenate(rows_parts).astype(np.int64)
        self._codes = np.ascontiguousarray(np.concatenate(codes_parts), dtype=np.uint8)
        self._offsets = offsets
        self._pending_rows = [[] for _ in range(self.k_clusters)]
        self._pending_codes = [[] for _ in range(self.k_clusters)]
        self._dirty = False

    def _probe_order(self, q64: np.ndarray, p: int) -> np.ndarray:
        dist = self._coarse_sq - 2.0 * (self._coarse64 @ q64)
        return np.argsort(dist, kind="stable")[:p]

    def search(self, query: np.ndarray, p: int, k: int = 1):
        """Top-k SearchHits for one unit-normalized query vector."""
        if self.total == 0:
            raise EmptyIndex("search on an index with no vectors")
        if not 1 <= p <= self.k_clusters:
            raise ValueError(f"p must be in [1, {self.k_clusters}], got {p}")
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        q64 = np.asarray(query, dtype=np.float64).reshape(-1)
        if q64.shape[0] != self.dim:
            raise DimensionMismatch(f"query dim {q64.shape[0]} != {self.dim}")
        self._seal()
        probes = self._probe_order(q64, p)
        if self.residual:
            bases = self._coarse64[probes] @ q64
        else:
            bases = np.zeros(len(probes), dtype=np.float64)
        lut = pq.adc_table(self.codebook, q64)
        scores = kernels.scan_probed(self._codes, self._offsets, probes, bases, lut)
        spans = [
            (int(self._offsets[l]), int(self._offsets[l + 1]))
            for l in probes
            if self._offsets[l + 1] > self._offsets[l]
        ]
        if not spans:
            return []
        rows = np.concatenate([self._rows[s:e] for s, e in spans])
        return _select_hits(scores, lambda i: self.ids[rows[i]], k)

    def search_batch(self, queries: np.ndarray, p: int, k: int = 1, workers: int = 1):
        """One hit list per query row; ``workers`` > 1 uses a thread pool."""
        q = np.asarray(queries)
        if q.ndim != 2:
            raise DimensionMismatch("queries must be a (n, d) matrix")
        self._seal()
        if workers > 1 and q.shape[0] > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(lambda row: self.search(row, p, k), q))
        return [self.search(row, p, k) for row in q]

    def save(self, path) -> None:
        self._seal()
        m = self.m
        entry = np.dtype([("row", "<u8"), ("code", np.uint8, (m,))])
        with open(path, "wb") as f:
            f.write(_HEADER.pack(MAGIC, VERSION, self.dim, self.k_clusters, m,
                                 1 if self.residual else 0))
            f.write(np.ascontiguousarray(self.coarse, dtype="<f4").tobytes())
            f.write(np.ascontiguousarray(self.codebook.codebooks, dtype="<f4").tobytes())
            for lst in range(self.k_clusters):
                s, e = int(self._offsets[lst]), int(self._offsets[lst + 1])
                f.write(struct.pack("<Q", e - s))
                block = np.empty(e - s, dtype=entry)
                block["row"] = self._rows[s:e]
                block["code"] = self._codes[s:e]
                f.write(block.tobytes())
            f.write(struct.pack("<Q", len(self.ids)))
            for sid in self.ids:
                raw = sid.encode("utf-8")
                f.write(struct.pack("<I", len(raw)))
                f.write(raw)

    @classmethod
    def load(cls, path) -> "IvfPqIndex":
        with open(path, "rb") as f:
            head = _read_exact(f, _HEADER.size, path)
            magic, version, dim, k_clusters, m, residual = _HEADER.unpack(head)
            if magic != MAGIC:
                raise FormatError(f"{path}: bad magic {magic!r}")
            if version != VERSION:
                raise FormatError(f"{path}: unsupported version {version}")
            if m == 0 or dim % m != 0:
                raise FormatError(f"{path}: dim {dim} not divisible by m {m}")
            sub_dim = dim // m
            coarse = np.frombuffer(
                _read_exact(f, 4 * k_clusters * dim, path), dtype="<f4"
            ).reshape(k_clusters, dim)
            books = np.frombuffer(
                _read_exact(f, 4 * m * pq.CODES_PER_SUBSPACE * sub_dim, path),
                dtype="<f4",
            ).reshape(m, pq.CODES_PER_SUBSPACE, sub_dim)
            index = cls(coarse.copy(), PQCodebook(books.copy()), residual=bool(residual))
            entry = np.dtype([("row", "<u8"), ("code", np.uint8, (m,))])
            offsets = np.zeros(k_clusters + 1, dtype=np.int64)
            rows_parts, codes_parts = [], []
            for lst in range(k_clusters):
                (count,) = struct.unpack("<Q", _read_exact(f, 8, path))
                block = np.frombuffer(
                    _read_exact(f, count * entry.itemsize, path), dtype=entry
                )
                rows_parts.append(block["row"].astype(np.int64))
                codes_parts.append(block["code"].reshape(count, m))
                offsets[lst + 1] = offsets[lst] + count
            (id_count,) = struct.unpack("<Q", _read_exact(f, 8, path))
            ids = []
            for _ in range(id_count):
                (ln,) = struct.unpack("<I", _read_exact(f, 4, path))
                ids.append(_read_exact(f, ln, path).decode("utf-8"))
        index._rows = np.concatenate(rows_parts) if rows_parts else np.empty(0, np.int64)
        index._codes = (
            np.ascontiguousarray(np.concatenate(codes_parts), dtype=np.uint8)
            if codes_parts
            else np.empty((0, m), dtype=np.uint8)
        )
        index._offsets = offsets
        index.ids = ids
        index._id_set = set(ids)
        if len(index._id_set) != len(ids):
            raise DuplicateId(f"{path}: id table contains duplicates")
        index._dirty = False
        return index


def _read_exact(f, n: int, path) -> bytes:
    buf = f.read(n)
    if len(buf) != n:
        raise TruncatedFile(f"{path}: expected {n} bytes, got {len(buf)}")
    return buf


def build_index(
    matrix: EmbeddingMatrix,
    k_clusters: int = None,
    m: int = 64,
    residual: bool = True,
    n_iter: int = 20,
    seed: int = 0,
    train_rows: int = None,
) -> IvfPqIndex:
    """Train coarse + PQ stages on ``matrix`` (or a seeded row subsample) and
    add every row."""
    if k_clusters is None:
        k_clusters = default_k_clusters(matrix.count)
    train = matrix.vectors
    if train_rows is not None and train_rows < matrix.count:
        rng = np.random.default_rng(seed)
        pick = np.sort(rng.choice(matrix.count, size=train_rows, replace=False))
        train = matrix.vectors[pick]
    coarse = train_coarse(train, k_clusters, n_iter=n_iter, seed=seed)
    if residual:
        labels, _ = assign_nearest(train, coarse)
        fit_on = train.astype(np.float64) - coarse.astype(np.float64)[labels]
    else:
        fit_on = train
    codebook = pq.train_pq(fit_on, m, n_iter=n_iter, seed=seed)
    index = IvfPqIndex(coarse, codebook, residual=residual)
    index.add(matrix)
    return index


def exact_search(matrix: EmbeddingMatrix, query: np.ndarray, k: int = 1):
    """Brute-force float64 inner-product search over an embedding matrix."""
    if matrix.count == 0:
        raise EmptyIndex("exact search over an empty matrix")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    q64 = np.asarray(query, dtype=np.float64).reshape(-1)
    if q64.shape[0] != matrix.dim:
        raise DimensionMismatch(f"query dim {q64.shape[0]} != {matrix.dim}")
    scores = np.clip(matrix.vectors.astype(np.float64) @ q64, -1.0, 1.0)
    return _select_hits(scores, lambda i: matrix.ids[i], k)
