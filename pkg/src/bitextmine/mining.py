"""Candidate mining: nearest-source alignment per target sentence.

Three modes share one scoring discipline. A fast approximate route proposes
the best source per target (float32 matmul for in-bucket alignment, ADC via
the IVF-PQ index for monolingual mining), then the proposed pair is re-scored
with an exact float64 dot product of the stored unit vectors. Only the exact
score is compared against the threshold and recorded as ``las``.

Pairs at or above the mode threshold are kept. Pairs landing within
``NEAR_MISS_MARGIN`` below it are retained separately for inspection.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .embeddings import EmbeddingMatrix, cosine_similarity
from .errors import ConfigError
from .ivfpq import IvfPqIndex
from .records import SentenceRecord, clean_cell

NEAR_MISS_MARGIN = 0.1
_CHUNK = 1024

MODES = ("comparable", "docpair", "monolingual")


@dataclass(frozen=True)
class ThresholdPolicy:
    """Per-mode minimum alignment score, each strictly inside (0, 1)."""

    comparable: float = 0.75
    docpair: float = 0.75
    monolingual: float = 0.80

    def __post_init__(self):
        for mode in MODES:
            value = getattr(self, mode)
            if not 0.0 < value < 1.0:
                raise ConfigError(f"{mode} threshold must be in (0, 1), got {value}")

    def threshold_for(self, mode: str) -> float:
        if mode not in MODES:
            raise ConfigError(f"unknown mining mode: {mode}")
        return getattr(self, mode)


@dataclass(frozen=True)
class CandidatePair:
    src_id: str
    tgt_id: str
    las: float  # exact float64 cosine of the stored unit vectors
    mode: str
    bucket: str
    approx_score: Optional[float] = None  # first-stage score that proposed the pair


@dataclass(frozen=True)
class MinedPair:
    """A kept pair carrying its sentence texts and languages, the durable row.

    The TSV serialization keeps the seven miner columns; languages travel
    side-band (they are constant per mining run) and are re-attached on read.
    """

    src_id: str
    tgt_id: str
    src_lang: str
    tgt_lang: str
    src_text: str
    tgt_text: str
    las: float
    mode: str
    bucket: str

    def __post_init__(self):
        if self.src_lang == self.tgt_lang:
            raise ConfigError(f"pair languages must differ, both {self.src_lang}")


@dataclass
class MiningResult:
    pairs: list = field(default_factory=list)  # CandidatePair, kept
    near_misses: list = field(default_factory=list)  # CandidatePair, below threshold
    report: dict = field(default_factory=dict)


def group_by_bucket(records: Sequence[SentenceRecord]) -> dict:
    groups: dict = {}
    for rec in records:
        groups.setdefault(rec.bucket, []).append(rec.sent_id)
    return groups


def align_bucket(
    src: EmbeddingMatrix, tgt: EmbeddingMatrix, mode: str, bucket: str
) -> list:
    """Best source per target row, unthresholded.

    The float32 similarity matrix picks the argmax; rows with tied maxima
    resolve to the lexicographically lowest source sent_id. The returned
    ``las`` is always the float64 re-score.
    """
    out = []
    if src.count == 0 or tgt.count == 0:
        return out
    for start in range(0, tgt.count, _CHUNK):
        block = tgt.vectors[start : start + _CHUNK]
        sims = block @ src.vectors.T
        best = sims.max(axis=1)
        arg = sims.argmax(axis=1)
        tie_rows = np.flatnonzero((sims == best[:, None]).sum(axis=1) > 1)
        for i in tie_rows:
            ties = np.flatnonzero(sims[i] == best[i])
            arg[i] = min(ties, key=lambda t: src.ids[t])
        for i in range(block.shape[0]):
            j = int(arg[i])
            las = cosine_similarity(src.vectors[j], block[i])
            out.append(
                CandidatePair(
                    src_id=src.ids[j],
                    tgt_id=tgt.ids[start + i],
                    las=las,
                    mode=mode,
                    bucket=bucket,
                    approx_score=float(best[i]),
                )
            )
    return out


def _split_by_threshold(candidates, threshold: float, result: MiningResult) -> None:
    for pair in candidates:
        if pair.las >= threshold:
            result.pairs.append(pair)
        elif pair.las >= threshold - NEAR_MISS_MARGIN:
            result.near_misses.append(pair)


def _mine_bucketed(
    src_records, tgt_records, src_matrix, tgt_matrix, policy, mode, report_extra
) -> MiningResult:
    threshold = policy.threshold_for(mode)
    src_groups = group_by_bucket(src_records)
    tgt_groups = group_by_bucket(tgt_records)
    result = MiningResult()
    aligned = 0
    candidates = 0
    for bucket in sorted(set(src_groups) | set(tgt_groups)):
        if bucket not in src_groups or bucket not in tgt_groups:
            continue
        sub_src = src_matrix.subset(src_groups[bucket])
        sub_tgt = tgt_matrix.subset(tgt_groups[bucket])
        found = align_bucket(sub_src, sub_tgt, mode, bucket)
        candidates += len(found)
        aligned += 1
        _split_by_threshold(found, threshold, result)
    src_only = len(set(src_groups) - set(tgt_groups))
    tgt_only = len(set(tgt_groups) - set(src_groups))
    result.report = {
        "mode": mode,
        "threshold": threshold,
        "buckets_aligned": aligned,
        report_extra[0]: src_only,
        report_extra[1]: tgt_only,
        "candidates": candidates,
        "kept": len(result.pairs),
        "near_misses": len(result.near_misses),
        "rejected": candidates - len(result.pairs),
    }
    return result


def mine_comparable(
    src_records, tgt_records, src_matrix, tgt_matrix, policy: ThresholdPolicy = None
) -> MiningResult:
    """Align within shared buckets (typically month); skip one-sided buckets."""
    policy = policy or ThresholdPolicy()
    return _mine_bucketed(
        src_records, tgt_records, src_matrix, tgt_matrix, policy,
        "comparable", ("src_only_buckets", "tgt_only_buckets"),
    )


def mine_docpair(
    src_records, tgt_records, src_matrix, tgt_matrix, policy: ThresholdPolicy = None
) -> MiningResult:
    """Align within shared document pairs; count unpaired documents."""
    policy = policy or ThresholdPolicy()
    return _mine_bucketed(
        src_records, tgt_records, src_matrix, tgt_matrix, policy,
        "docpair", ("unpaired_src", "unpaired_tgt"),
    )


def mine_monolingual(
    query_matrix: EmbeddingMatrix,
    index: IvfPqIndex,
    indexed_matrix: EmbeddingMatrix,
    policy: ThresholdPolicy = None,
    p: int = 1,
    k: int = 1,
    workers: int = 1,
) -> MiningResult:
    """Probe the index with every query row, re-score hits exactly, threshold.

    With ``k`` > 1 all retrieved candidates are re-scored and the best exact
    score wins (ties to the lower sent_id); ``k=1`` keeps the rank-1 hit only.
    """
    policy = policy or ThresholdPolicy()
    threshold = policy.threshold_for("monolingual")
    result = MiningResult()
    no_hit = 0
    hit_lists = index.search_batch(query_matrix.vectors, p=p, k=k, workers=workers)
    candidates = []
    for qi, hits in enumerate(hit_lists):
        if not hits:
            no_hit += 1
            continue
        tgt_id = query_matrix.ids[qi]
        scored = []
        for hit in hits:
            las = cosine_similarity(
                indexed_matrix.row(hit.sent_id), query_matrix.vectors[qi]
            )
            scored.append((-las, hit.sent_id, hit.approx_score))
        neg_las, src_id, approx = min(scored)
        candidates.append(
            CandidatePair(
                src_id=src_id,
                tgt_id=tgt_id,
                las=-neg_las,
                mode="monolingual",
                bucket="*",
                approx_score=approx,
            )
        )
    _split_by_threshold(candidates, threshold, result)
    result.report = {
        "mode": "monolingual",
        "threshold": threshold,
        "queries": query_matrix.count,
        "no_hit": no_hit,
        "candidates": len(candidates),
        "kept": len(result.pairs),
        "near_misses": len(result.near_misses),
        "rejected": len(candidates) - len(result.pairs),
    }
    return result


def sort_canonical(pairs):
    """Stable output order: by target id, then source id."""
    return sorted(pairs, key=lambda p: (p.tgt_id, p.src_id))


def to_rows(pairs, records: Mapping) -> list:
    """Attach texts and languages from a sent_id -> SentenceRecord mapping,
    producing MinedPair rows in canonical order."""
    rows = []
    for pair in sort_canonical(pairs):
        src, tgt = records[pair.src_id], records[pair.tgt_id]
        rows.append(
            MinedPair(
                src_id=pair.src_id,
                tgt_id=pair.tgt_id,
                src_lang=src.lang,
                tgt_lang=tgt.lang,
                src_text=src.text,
                tgt_text=tgt.text,
                las=pair.las,
                mode=pair.mode,
                bucket=pair.bucket,
            )
        )
    return rows


def write_pairs(path, rows) -> None:
    """Seven-column TSV: src_id, tgt_id, src_text, tgt_text, las, mode, bucket."""
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(
                "\t".join(
                    (
                        row.src_id,
                        row.tgt_id,
                        clean_cell(row.src_text),
                        clean_cell(row.tgt_text),
                        f"{row.las:.8f}",
                        row.mode,
                        row.bucket,
                    )
                )
                + "\n"
            )


def read_pairs(path, src_lang: str = "en", tgt_lang: str = "und") -> list:
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            src_id, tgt_id, src_text, tgt_text, las, mode, bucket = line.split("\t")
            rows.append(
                MinedPair(
                    src_id=src_id,
                    tgt_id=tgt_id,
                    src_lang=src_lang,
                    tgt_lang=tgt_lang,
                    src_text=src_text,
                    tgt_text=tgt_text,
                    las=float(las),
                    mode=mode,
                    bucket=bucket,
                )
            )
    return rows
