"""Sentence embedding storage, the exact cosine alignment score, and the
remote provider client.

The on-disk format ("SEMB") is a little-endian binary block:

    magic "SEMB" | version u32 | dim u32 | count u64 | dtype u8 (0 = f32)
    followed by count x dim float32 values, row-major.

A sidecar file at ``<path>.ids`` carries the newline-delimited sentence ids,
exactly ``count`` lines, in row order.

The alignment score between two sentences is the inner product of their
unit-normalized embeddings, computed in float64.
"""
from __future__ import annotations

import struct
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import requests

from .errors import (
    DimensionMismatch,
    FormatError,
    PartialResponse,
    ProviderUnavailable,
    TruncatedFile,
    ZeroVector,
)

MAGIC = b"SEMB"
VERSION = 1
_HEADER = struct.Struct("<4sIIQB")

NORM_TOLERANCE = 1e-4  # rows further than this from unit norm are re-normalized on load


def normalize(v: np.ndarray) -> np.ndarray:
    """Scale a vector to unit L2 norm (float32), preserving direction."""
    v64 = np.asarray(v, dtype=np.float64)
    norm = float(np.sqrt(np.dot(v64, v64)))
    if norm == 0.0:
        raise ZeroVector("cannot normalize an all-zero vector")
    return (v64 / norm).astype(np.float32)


def normalize_rows(vectors: np.ndarray, tolerance: float = NORM_TOLERANCE) -> tuple[np.ndarray, int]:
    """Re-normalize rows whose norm deviates from 1 by more than ``tolerance``.

    Returns the (possibly copied) array and the number of rows fixed. Rows
    already within tolerance are left bit-exact.
    """
    vectors = np.ascontiguousarray(vectors, dtype=np.float32)
    if vectors.size == 0:
        return vectors, 0
    norms = np.linalg.norm(vectors.astype(np.float64), axis=1)
    off = np.abs(norms - 1.0) > tolerance
    n_fixed = int(np.count_nonzero(off))
    if n_fixed:
        if np.any(norms[off] == 0.0):
            raise ZeroVector("matrix contains an all-zero row")
        fixed = vectors.copy()
        fixed[off] = (vectors[off].astype(np.float64) / norms[off, None]).astype(np.float32)
        return fixed, n_fixed
    return vectors, 0


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Inner product of two unit vectors, accumulated in float64."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise DimensionMismatch(f"cosine over shapes {u.shape} vs {v.shape}")
    score = float(np.dot(u.astype(np.float64), v.astype(np.float64)))
    return min(1.0, max(-1.0, score))


@dataclass
class EmbeddingMatrix:
    """Unit-normalized float32 vectors keyed by sentence id, immutable after load."""

    ids: list[str]
    vectors: np.ndarray
    renormalized: int = 0
    _row_of: dict[str, int] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        if self.vectors.ndim != 2:
            raise DimensionMismatch(f"expected 2-d vectors, got shape {self.vectors.shape}")
        if len(self.ids) != self.vectors.shape[0]:
            raise DimensionMismatch(
                f"{len(self.ids)} ids for {self.vectors.shape[0]} vectors"
            )

    @property
    def count(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def row_index(self, sent_id: str) -> int:
        if self._row_of is None:
            self._row_of = {sid: i for i, sid in enumerate(self.ids)}
        return self._row_of[sent_id]

    def row(self, sent_id: str) -> np.ndarray:
        return self.vectors[self.row_index(sent_id)]

    def subset(self, ids: Sequence[str]) -> "EmbeddingMatrix":
        rows = [self.row_index(sid) for sid in ids]
        return EmbeddingMatrix(list(ids), self.vectors[rows])


def ids_path(path: str | Path) -> Path:
    return Path(str(path) + ".ids")


def export_embeddings(matrix: EmbeddingMatrix, path: str | Path) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, matrix.dim, matrix.count, 0))
        fh.write(np.ascontiguousarray(matrix.vectors, dtype="<f4").tobytes())
    with open(ids_path(path), "w", encoding="utf-8") as fh:
        for sid in matrix.ids:
            fh.write(sid + "\n")


def import_embeddings(path: str | Path) -> EmbeddingMatrix:
    """Read a SEMB file plus its id sidecar, re-normalizing drifted rows.

    The number of rows that needed fixing is recorded on the returned
    matrix as ``renormalized``.
    """
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise TruncatedFile(f"{path}: shorter than the SEMB header")
    magic, version, dim, count, dtype = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if dtype != 0:
        raise FormatError(f"{path}: unsupported dtype code {dtype}")
    expected = _HEADER.size + count * dim * 4
    if len(raw) < expected:
        raise TruncatedFile(f"{path}: expected {expected} bytes, found {len(raw)}")
    vectors = np.frombuffer(raw, dtype="<f4", count=count * dim, offset=_HEADER.size)
    vectors = vectors.reshape(count, dim).copy()
    ids = ids_path(path).read_text(encoding="utf-8").splitlines()
    if len(ids) != count:
        raise FormatError(f"{ids_path(path)}: {len(ids)} ids for {count} vectors")
    vectors, n_fixed = normalize_rows(vectors)
    return EmbeddingMatrix(ids, vectors, renormalized=n_fixed)


def fetch_remote_embeddings(
    sentences: Sequence,
    endpoint: str,
    batch_size: int = 64,
    max_attempts: int = 3,
    backoff: float = 0.5,
    timeout: float = 60.0,
    session: requests.Session | None = None,
) -> EmbeddingMatrix:
    """Fetch embeddings from an HTTP provider, preserving input order.

    ``sentences`` may be SentenceRecords or plain strings. Transient failures
    (connection errors, timeouts, 5xx) are retried with exponential backoff;
    a count mismatch in any batch raises PartialResponse.
    """
    texts = [s if isinstance(s, str) else s.text for s in sentences]
    ids = [f"q{i:06d}" if isinstance(s, str) else s.sent_id for i, s in enumerate(sentences)]
    if not texts:
        return EmbeddingMatrix([], np.zeros((0, 0), dtype=np.float32))
    own_session = session is None
    sess = session or requests.Session()
    chunks: list[np.ndarray] = []
    dim: int | None = None
    try:
        for start in range(0, len(texts), batch_size):
            batch = texts[start : start + batch_size]
            payload = _post_with_retry(sess, endpoint, batch, max_attempts, backoff, timeout)
            vectors = payload.get("vectors")
            if vectors is None or len(vectors) != len(batch):
                got = 0 if vectors is None else len(vectors)
                raise PartialResponse(f"sent {len(batch)} texts, received {got} vectors")
            arr = np.asarray(vectors, dtype=np.float32)
            if arr.ndim != 2:
                raise PartialResponse(f"provider returned ragged vectors for batch at {start}")
            if dim is None:
                dim = arr.shape[1]
            elif arr.shape[1] != dim:
                raise DimensionMismatch(f"provider switched dim {dim} -> {arr.shape[1]}")
            chunks.append(arr)
    finally:
        if own_session:
            sess.close()
    vectors = np.vstack(chunks)
    vectors, n_fixed = normalize_rows(vectors)
    return EmbeddingMatrix(ids, vectors, renormalized=n_fixed)


def _post_with_retry(sess, endpoint, texts, max_attempts, backoff, timeout) -> dict:
    last_error: Exception | None = None
    for attempt in range(max_attempts):
        try:
            resp = sess.post(endpoint, json={"texts": texts}, timeout=timeout)
            if resp.status_code >= 500:
                last_error = ProviderUnavailable(f"{endpoint}: HTTP {resp.status_code}")
            elif resp.status_code >= 400:
                raise ProviderUnavailable(f"{endpoint}: HTTP {resp.status_code}: {resp.text[:200]}")
            else:
                return resp.json()
        except (requests.ConnectionError, requests.Timeout) as exc:
            last_error = exc
        if attempt + 1 < max_attempts:
            time.sleep(backoff * 2**attempt)
    raise ProviderUnavailable(f"{endpoint}: giving up after {max_attempts} attempts: {last_error}")
