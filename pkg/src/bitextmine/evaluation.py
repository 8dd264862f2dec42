"""Human-evaluation tooling: band-stratified sampling and score analytics.

Mined pairs are stratified into three bands around the mining threshold t:
reject [t-0.1, t], marginal_accept (t, t+0.1], definite_accept (t+0.1, 1].
Pairs below t-0.1 are out of scope for annotation. Samples are shuffled so
annotators see no ordering by source or score, then packed into batches of
30. Annotators return STS scores on the 0..5 ordinal scale; the report
recomputes every statistic from the raw annotations.
"""
from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigError, DegenerateInput, LengthMismatch
from .mining import MinedPair

BAND_WIDTH = 0.1
BATCH_SIZE = 30
STS_MIN, STS_MAX = 0, 5

BAND_REJECT = "reject"
BAND_MARGINAL = "marginal_accept"
BAND_DEFINITE = "definite_accept"
BANDS = (BAND_REJECT, BAND_MARGINAL, BAND_DEFINITE)

ACCURACY_STS_FLOOR = 4  # a pair counts as correct when its mean STS >= this


def las_band(las: float, threshold: float) -> Optional[str]:
    """Band label for a score, or None when it falls below threshold - 0.1."""
    if threshold - BAND_WIDTH <= las <= threshold:
        return BAND_REJECT
    if threshold < las <= threshold + BAND_WIDTH:
        return BAND_MARGINAL
    if threshold + BAND_WIDTH < las <= 1.0:
        return BAND_DEFINITE
    return None


@dataclass(frozen=True)
class AnnotationSample:
    sample_id: str
    batch_id: int
    pair: MinedPair
    band: str


def stratified_sample(
    pairs: Sequence[MinedPair], threshold: float, n_per_band: int, seed: int = 0
):
    """Equal-size uniform draws per band, shuffled and packed into batches.

    Returns ``(samples, warnings)``. A band with fewer than ``n_per_band``
    members contributes everything it has plus a warning.
    """
    if n_per_band < 1:
        raise ConfigError(f"n_per_band must be >= 1, got {n_per_band}")
    rng = np.random.default_rng(seed)
    by_band: dict = {band: [] for band in BANDS}
    for pair in pairs:
        band = las_band(pair.las, threshold)
        if band is not None:
            by_band[band].append(pair)
    chosen = []
    warnings = []
    for band in BANDS:
        members = by_band[band]
        if len(members) < n_per_band:
            warnings.append(
                f"band {band}: wanted {n_per_band} samples, only {len(members)} available"
            )
            picked = list(range(len(members)))
        else:
            picked = sorted(rng.choice(len(members), size=n_per_band, replace=False))
        chosen.extend((members[i], band) for i in picked)
    order = rng.permutation(len(chosen))
    samples = []
    for out_pos, in_pos in enumerate(order):
        pair, band = chosen[int(in_pos)]
        samples.append(
            AnnotationSample(
                sample_id=f"s{out_pos:05d}",
                batch_id=out_pos // BATCH_SIZE,
                pair=pair,
                band=band,
            )
        )
    return samples, warnings


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their rank range."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Rank correlation: Pearson over average ranks."""
    if len(xs) != len(ys):
        raise LengthMismatch(f"series lengths differ: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise DegenerateInput(f"need at least 2 points, got {len(xs)}")
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateInput("constant series has no rank correlation")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    return float(np.dot(rx, ry) / np.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))


def export_annotation_csv(samples: Iterable[AnnotationSample], path) -> None:
    """What annotators see: texts only, no band or score."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["sample_id", "batch_id", "src_text", "tgt_text"])
        for s in samples:
            writer.writerow([s.sample_id, s.batch_id, s.pair.src_text, s.pair.tgt_text])


def export_annotation_key(samples: Iterable[AnnotationSample], path) -> None:
    """The withheld key: band, las, languages, English word count."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["sample_id", "band", "las", "src_lang", "tgt_lang", "en_words"])
        for s in samples:
            writer.writerow(
                [
                    s.sample_id,
                    s.band,
                    f"{s.pair.las:.8f}",
                    s.pair.src_lang,
                    s.pair.tgt_lang,
                    _en_word_count(s.pair) or "",
                ]
            )


def import_annotations(path) -> list:
    """Read (sample_id, annotator_id, sts) rows, validating the STS range."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        required = {"sample_id", "annotator_id", "sts"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ConfigError(f"{path}: annotation CSV needs columns {sorted(required)}")
        for line_no, row in enumerate(reader, start=2):
            try:
                sts = int(row["sts"])
            except ValueError:
                raise ConfigError(f"{path}:{line_no}: sts is not an integer")
            if not STS_MIN <= sts <= STS_MAX:
                raise ConfigError(
                    f"{path}:{line_no}: sts {sts} outside [{STS_MIN}, {STS_MAX}]"
                )
            rows.append((row["sample_id"], row["annotator_id"], sts))
    return rows


def _en_word_count(pair: MinedPair) -> Optional[int]:
    if pair.src_lang == "en":
        return len(pair.src_text.split())
    if pair.tgt_lang == "en":
        return len(pair.tgt_text.split())
    return None


def _safe_spearman(xs, ys) -> Optional[float]:
    try:
        return spearman(xs, ys)
    except (LengthMismatch, DegenerateInput):
        return None


def _band_stats(entries) -> dict:
    sts = [e["sts"] for e in entries]
    return {
        "count": len(entries),
        "mean_sts": statistics.fmean(sts) if sts else None,
        "median_sts": statistics.median(sts) if sts else None,
        "accuracy": (
            sum(1 for v in sts if v >= ACCURACY_STS_FLOOR) / len(sts) if sts else None
        ),
    }


def _stats_block(entries) -> dict:
    by_band = {band: [e for e in entries if e["band"] == band] for band in BANDS}
    accepted = by_band[BAND_MARGINAL] + by_band[BAND_DEFINITE]
    balanced = None
    marginal_stats = _band_stats(by_band[BAND_MARGINAL])
    definite_stats = _band_stats(by_band[BAND_DEFINITE])
    if marginal_stats["count"] and definite_stats["count"]:
        balanced = {
            "mean_sts": (marginal_stats["mean_sts"] + definite_stats["mean_sts"]) / 2,
            "accuracy": (marginal_stats["accuracy"] + definite_stats["accuracy"]) / 2,
        }
    las = [e["las"] for e in entries]
    sts = [e["sts"] for e in entries]
    lengths = [(e["las"], e["sts"], e["en_words"]) for e in entries if e["en_words"] is not None]
    agree = [e["spread"] for e in entries if e["spread"] is not None]
    return {
        "n_samples": len(entries),
        "bands": {
            BAND_REJECT: _band_stats(by_band[BAND_REJECT]),
            BAND_MARGINAL: marginal_stats,
            BAND_DEFINITE: definite_stats,
        },
        "all_accept": {
            "pooled": _band_stats(accepted),
            "balanced": balanced,
        },
        "correlations": {
            "las_sts": _safe_spearman(las, sts),
            "las_en_length": _safe_spearman(
                [l for l, _, _ in lengths], [w for _, _, w in lengths]
            ),
            "sts_en_length": _safe_spearman(
                [s for _, s, _ in lengths], [w for _, _, w in lengths]
            ),
        },
        "agreement_within_1": (
            sum(1 for s in agree if s <= 1) / len(agree) if agree else None
        ),
    }


def _entries_from_rows(key_rows, by_sample) -> list:
    entries = []
    for row in key_rows:
        scores = [sts for _, sts in by_sample.get(row["sample_id"], [])]
        if not scores:
            continue
        entries.append(
            {
                "lang": row["tgt_lang"] if row["src_lang"] == "en" else row["src_lang"],
                "band": row["band"],
                "las": float(row["las"]),
                "sts": statistics.fmean(scores),
                "en_words": int(row["en_words"]) if row["en_words"] else None,
                "spread": max(scores) - min(scores) if len(scores) >= 2 else None,
            }
        )
    return entries


def _assemble_report(entries, total_samples: int) -> dict:
    languages = sorted({e["lang"] for e in entries})
    return {
        "overall": _stats_block(entries),
        "by_language": {
            lang: _stats_block([e for e in entries if e["lang"] == lang])
            for lang in languages
        },
        "annotated_samples": len(entries),
        "total_samples": total_samples,
    }


def analysis_report_from_files(key_path, annotations_path) -> dict:
    """analysis_report over the key CSV and collected annotation CSV."""
    key_rows = []
    with open(key_path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        required = {"sample_id", "band", "las", "src_lang", "tgt_lang", "en_words"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ConfigError(f"{key_path}: key CSV needs columns {sorted(required)}")
        key_rows = list(reader)
    by_sample: dict = {}
    for sample_id, annotator_id, sts in import_annotations(annotations_path):
        by_sample.setdefault(sample_id, []).append((annotator_id, sts))
    known = {row["sample_id"] for row in key_rows}
    unknown = sorted(set(by_sample) - known)
    if unknown:
        raise ConfigError(f"annotations reference unknown sample ids: {unknown[:5]}")
    entries = _entries_from_rows(key_rows, by_sample)
    return _assemble_report(entries, len(key_rows))


def analysis_report(samples: Sequence[AnnotationSample], annotations: Iterable) -> dict:
    """Per-language and overall statistics over annotated samples.

    ``annotations`` holds (sample_id, annotator_id, sts) tuples. Samples with
    no annotations are skipped; agreement statistics use only samples with at
    least two annotators and are omitted when none exist.
    """
    by_sample: dict = {}
    for sample_id, annotator_id, sts in annotations:
        by_sample.setdefault(sample_id, []).append((annotator_id, sts))
    known = {s.sample_id for s in samples}
    unknown = sorted(set(by_sample) - known)
    if unknown:
        raise ConfigError(f"annotations reference unknown sample ids: {unknown[:5]}")
    entries = []
    for sample in samples:
        scores = [sts for _, sts in by_sample.get(sample.sample_id, [])]
        if not scores:
            continue
        entries.append(
            {
                "lang": (
                    sample.pair.tgt_lang
                    if sample.pair.src_lang == "en"
                    else sample.pair.src_lang
                ),
                "band": sample.band,
                "las": sample.pair.las,
                "sts": statistics.fmean(scores),
                "en_words": _en_word_count(sample.pair),
                "spread": max(scores) - min(scores) if len(scores) >= 2 else None,
            }
        )
    return _assemble_report(entries, len(samples))
