"""Post-processing filters, held-out decontamination, and pivot extraction.

Filter order in the pipeline is threshold (applied at mining time), then
minimum English length, then language identification, then exact
deduplication. All but dedup are per-pair predicates, so only dedup's
position matters; it runs last.
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .errors import ConfigError, DetectorUnavailable
from .mining import MinedPair

_WS = re.compile(r"\s+")


@dataclass(frozen=True)
class FilterConfig:
    min_en_words: int = 4
    langid_enabled: bool = True
    dedup_enabled: bool = True
    rng_seed: int = 0

    def __post_init__(self):
        if self.min_en_words < 1:
            raise ConfigError(f"min_en_words must be >= 1, got {self.min_en_words}")


def _en_text(pair: MinedPair) -> Optional[str]:
    if pair.src_lang == "en":
        return pair.src_text
    if pair.tgt_lang == "en":
        return pair.tgt_text
    return None


def dedup_exact(pairs: Iterable[MinedPair]) -> list:
    """Drop a pair only when BOTH sides match an earlier pair exactly."""
    seen = set()
    kept = []
    for pair in pairs:
        key = (pair.src_text, pair.tgt_text)
        if key in seen:
            continue
        seen.add(key)
        kept.append(pair)
    return kept


def filter_min_length(pairs: Iterable[MinedPair], min_en_words: int = 4) -> list:
    """Drop pairs whose English side has fewer than ``min_en_words`` words.

    Word = whitespace-delimited token of the raw string. Pairs without an
    English side (pivot output) pass through untouched.
    """
    kept = []
    for pair in pairs:
        en = _en_text(pair)
        if en is not None and len(en.split()) < min_en_words:
            continue
        kept.append(pair)
    return kept


def filter_langid(pairs, detector=None, hard_fail: bool = False):
    """Drop pairs where either side's detected language differs from its tag.

    Returns ``(kept, warning)``. A DetectorUnavailable from construction or
    detection skips the filter with a warning unless ``hard_fail`` is set.
    """
    pairs = list(pairs)
    try:
        if detector is None:
            from .langid import default_detector

            detector = default_detector()
        kept = []
        for pair in pairs:
            src_code, _ = detector.detect(pair.src_text, expected=pair.src_lang)
            tgt_code, _ = detector.detect(pair.tgt_text, expected=pair.tgt_lang)
            if src_code == pair.src_lang and tgt_code == pair.tgt_lang:
                kept.append(pair)
        return kept, None
    except DetectorUnavailable as exc:
        if hard_fail:
            raise
        return pairs, f"langid filter skipped: {exc}"


def normalize_for_overlap(text: str) -> str:
    """Lowercase, strip all Unicode punctuation, collapse whitespace."""
    text = text.lower()
    text = "".join(
        ch for ch in text if not unicodedata.category(ch).startswith("P")
    )
    return _WS.sub(" ", text).strip()


@dataclass
class HeldoutSets:
    """Normalized held-out sentences keyed by (pair, side), e.g. ("en-hi", "hi")."""

    sets: dict

    @property
    def en_sides(self) -> dict:
        return {k: v for k, v in self.sets.items() if k[1] == "en"}

    def tgt_side(self, lang: str) -> Optional[set]:
        return self.sets.get((f"en-{lang}", lang))


def load_heldout(directory) -> HeldoutSets:
    """Load ``<pair>.<side>.txt`` files (one sentence per line) from a directory."""
    sets: dict = {}
    for path in sorted(Path(directory).glob("*.txt")):
        parts = path.name.split(".")
        if len(parts) != 3:
            raise ConfigError(f"held-out file not named <pair>.<side>.txt: {path.name}")
        pair_name, side = parts[0], parts[1]
        lines = path.read_text(encoding="utf-8").splitlines()
        sets[(pair_name, side)] = {
            normalize_for_overlap(line) for line in lines if line.strip()
        }
    return HeldoutSets(sets)


def decontaminate(pairs: Iterable[MinedPair], heldout: HeldoutSets):
    """Remove pairs overlapping held-out data; returns ``(kept, removal_counts)``.

    A pair is removed when (i) its English side appears, normalized, in the
    English side of ANY held-out set, or (ii) a non-English side appears in
    the held-out set of its own en-X pair. Counts are reported per held-out
    file; a pair matching several sets increments each of them.
    """
    counts: dict = {f"{k[0]}.{k[1]}": 0 for k in heldout.sets}
    kept = []
    for pair in pairs:
        contaminated = False
        for lang, text in ((pair.src_lang, pair.src_text), (pair.tgt_lang, pair.tgt_text)):
            norm = normalize_for_overlap(text)
            if lang == "en":
                for (pair_name, side), sentences in heldout.en_sides.items():
                    if norm in sentences:
                        counts[f"{pair_name}.{side}"] += 1
                        contaminated = True
            else:
                sentences = heldout.tgt_side(lang)
                if sentences is not None and norm in sentences:
                    counts[f"en-{lang}.{lang}"] += 1
                    contaminated = True
        if not contaminated:
            kept.append(pair)
    return kept, counts


@dataclass(frozen=True)
class PivotGroup:
    pivot_text: str  # whitespace-collapsed English sentence
    left: tuple  # en-A pairs sharing it
    right: tuple  # en-B pairs sharing it


@dataclass(frozen=True)
class PivotPair(MinedPair):
    left_provenance: str = ""
    right_provenance: str = ""


def _pivot_key(pair: MinedPair) -> Optional[str]:
    en = _en_text(pair)
    if en is None:
        return None
    return _WS.sub(" ", en.strip())


def _non_en_side(pair: MinedPair):
    if pair.src_lang == "en":
        return pair.tgt_id, pair.tgt_lang, pair.tgt_text
    return pair.src_id, pair.src_lang, pair.src_text


def build_pivot_groups(corpus_a, corpus_b) -> list:
    """Groups of pairs sharing an English sentence present in both corpora."""
    left: dict = {}
    right: dict = {}
    for pair in corpus_a:
        key = _pivot_key(pair)
        if key is not None:
            left.setdefault(key, []).append(pair)
    for pair in corpus_b:
        key = _pivot_key(pair)
        if key is not None:
            right.setdefault(key, []).append(pair)
    groups = []
    for key in sorted(set(left) & set(right)):
        groups.append(
            PivotGroup(pivot_text=key, left=tuple(left[key]), right=tuple(right[key]))
        )
    return groups


def pivot_extract(corpus_a, corpus_b, seed: int = 0) -> list:
    """One A-B pair per shared English sentence, chosen uniformly from m*n.

    Groups are visited in sorted pivot-text order and draws come from one
    seeded generator, so a fixed seed reproduces the output exactly. The
    emitted las is the minimum of the two constituent scores.
    """
    rng = np.random.default_rng(seed)
    out = []
    for group in build_pivot_groups(corpus_a, corpus_b):
        m, n = len(group.left), len(group.right)
        choice = int(rng.integers(m * n))
        a = group.left[choice // n]
        b = group.right[choice % n]
        a_id, a_lang, a_text = _non_en_side(a)
        b_id, b_lang, b_text = _non_en_side(b)
        out.append(
            PivotPair(
                src_id=a_id,
                tgt_id=b_id,
                src_lang=a_lang,
                tgt_lang=b_lang,
                src_text=a_text,
                tgt_text=b_text,
                las=min(a.las, b.las),
                mode="pivot",
                bucket="*",
                left_provenance=f"{a.mode}:{a.bucket}",
                right_provenance=f"{b.mode}:{b.bucket}",
            )
        )
    return out


def refine_pipeline(pairs, cfg: FilterConfig = None, detector=None, heldout=None):
    """Length, langid, optional decontamination, then dedup.

    Returns ``(kept, report)``; the report's ``filters_applied`` list is the
    manifest entry for the refine stage.
    """
    cfg = cfg or FilterConfig()
    pairs = list(pairs)
    report = {"input": len(pairs), "filters_applied": [], "warnings": []}

    before = len(pairs)
    pairs = filter_min_length(pairs, cfg.min_en_words)
    report["filters_applied"].append(
        {"filter": "min_length", "min_en_words": cfg.min_en_words,
         "removed": before - len(pairs)}
    )

    if cfg.langid_enabled:
        before = len(pairs)
        pairs, warning = filter_langid(pairs, detector=detector)
        entry = {"filter": "langid", "removed": before - len(pairs)}
        if warning:
            entry["skipped"] = True
            report["warnings"].append(warning)
        report["filters_applied"].append(entry)

    if heldout is not None:
        before = len(pairs)
        pairs, counts = decontaminate(pairs, heldout)
        report["filters_applied"].append(
            {"filter": "decontaminate", "removed": before - len(pairs),
             "per_set": counts}
        )

    if cfg.dedup_enabled:
        before = len(pairs)
        pairs = dedup_exact(pairs)
        report["filters_applied"].append(
            {"filter": "dedup", "removed": before - len(pairs)}
        )

    report["output"] = len(pairs)
    return pairs, report


def write_pivot_pairs(path, pairs) -> None:
    """Pair TSV plus the two constituent provenance columns."""
    from .mining import sort_canonical
    from .records import clean_cell

    with open(path, "w", encoding="utf-8") as f:
        for row in sort_canonical(pairs):
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
                        row.left_provenance,
                        row.right_provenance,
                    )
                )
                + "\n"
            )
