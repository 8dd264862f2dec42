"""Trigram-frequency language identification.

The default detector ranks character trigrams of the input against per-language
profiles built from small seed corpora shipped under ``data/langid_seeds/``.
Profiles follow the classic rank-order scheme: each language keeps its
``PROFILE_SIZE`` most frequent trigrams, and the distance between a text and a
language is the summed rank displacement, with out-of-profile trigrams paying
the maximum penalty.

The detector is a plug point: refine accepts any object exposing
``detect(text, expected=None) -> (code, confidence)``. Ship your own wrapper
around a real classifier to replace this one.
"""
from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

from .errors import DetectorUnavailable
from .records import DEFAULT_LANGUAGES

PROFILE_SIZE = 300

_WS = re.compile(r"\s+")


def trigrams(text: str) -> list:
    """Character trigrams of the letters-and-spaces skeleton of ``text``."""
    text = _WS.sub(" ", text.strip().lower())
    text = "".join(ch if ch.isalpha() or ch == " " else " " for ch in text)
    text = _WS.sub(" ", text).strip()
    if not text:
        return []
    padded = f" {text} "
    return [padded[i : i + 3] for i in range(len(padded) - 2)]


def rank_profile(text: str, size: int = PROFILE_SIZE) -> dict:
    """Map of trigram -> rank (0 = most frequent), capped at ``size`` entries.

    Ties in frequency order break lexicographically so profiles are stable
    regardless of input iteration order.
    """
    counts: dict = {}
    for tri in trigrams(text):
        counts[tri] = counts.get(tri, 0) + 1
    ordered = sorted(counts, key=lambda t: (-counts[t], t))[:size]
    return {tri: rank for rank, tri in enumerate(ordered)}


class TrigramDetector:
    def __init__(self, profiles: dict):
        if not profiles:
            raise DetectorUnavailable("no language profiles supplied")
        self.profiles = profiles

    @property
    def languages(self) -> tuple:
        return tuple(sorted(self.profiles))

    @classmethod
    def from_seed_corpora(cls, languages=None) -> "TrigramDetector":
        languages = sorted(languages or DEFAULT_LANGUAGES)
        profiles = {}
        for lang in languages:
            try:
                seed = (
                    resources.files("bitextmine")
                    .joinpath(f"data/langid_seeds/{lang}.txt")
                    .read_text(encoding="utf-8")
                )
            except FileNotFoundError:
                raise DetectorUnavailable(f"no seed corpus for language: {lang}")
            profiles[lang] = rank_profile(seed)
        return cls(profiles)

    def _distance(self, text_ranks: dict, profile: dict) -> float:
        if not text_ranks:
            return 1.0
        total = 0
        for tri, rank in text_ranks.items():
            other = profile.get(tri)
            total += PROFILE_SIZE if other is None else abs(rank - other)
        return total / (len(text_ranks) * PROFILE_SIZE)

    def detect(self, text: str, expected: str = None):
        """Best-matching language code and a confidence in [0, 1].

        Texts with no extractable trigrams return ``(expected, 0.0)`` when an
        expectation is given (no evidence against it), else ``("und", 0.0)``.
        """
        text_ranks = rank_profile(text)
        if not text_ranks:
            return (expected or "und", 0.0)
        scored = sorted(
            (self._distance(text_ranks, profile), lang)
            for lang, profile in self.profiles.items()
        )
        best_dist, best_lang = scored[0]
        if len(scored) == 1:
            return (best_lang, 1.0)
        runner_dist = scored[1][0]
        if runner_dist <= 0.0:
            return (best_lang, 0.0)
        confidence = max(0.0, min(1.0, (runner_dist - best_dist) / runner_dist))
        return (best_lang, confidence)


@lru_cache(maxsize=1)
def default_detector() -> TrigramDetector:
    """Detector over the full shipped language set, built once per process."""
    return TrigramDetector.from_seed_corpora()
