"""Sentence segmentation with Indic-aware delimiters and non-breaking prefixes.

Splits occur only at terminal delimiters (``. ? ! …`` plus the dandas ``।``
``॥``) and at line breaks. A period is protected (no split) when it follows a
configured non-breaking prefix, a bare number, or a single-letter initial,
when a digit follows it immediately (decimals), or when it sits inside a
dotted prefix such as ``से.मी.``. Closing quotes and brackets after a
delimiter attach to the sentence they close.

Prefix lists are plain-text config files shipped per language under
``data/nonbreaking_prefixes/``; non-English languages also inherit the English
list because Latin abbreviations are common in Indic running text.
"""
from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

TERMINALS = ".?!…।॥"
_CLOSERS = "\"')]}»’”"
_OPEN_QUOTES = "\"'«‘“(["

_LEADING_PUNCT = re.compile(r"^[^\w.]+")


@lru_cache(maxsize=None)
def load_prefixes(lang: str) -> frozenset[str]:
    """Load the non-breaking prefix set for a language (falls back to en)."""
    prefixes: set[str] = set()
    for name in {"en", lang}:
        try:
            data = (
                resources.files("bitextmine")
                .joinpath(f"data/nonbreaking_prefixes/{name}.txt")
                .read_text(encoding="utf-8")
            )
        except FileNotFoundError:
            continue
        for line in data.splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                prefixes.add(line)
    return frozenset(prefixes)


def _token_before(line: str, pos: int) -> str:
    """The whitespace-delimited token ending just before ``line[pos]``."""
    start = pos
    while start > 0 and not line[start - 1].isspace():
        start -= 1
    return _LEADING_PUNCT.sub("", line[start:pos])


@lru_cache(maxsize=None)
def _dotted_stems(prefixes: frozenset[str]) -> frozenset[str]:
    """Every stem of a dotted prefix, cut at each internal dot.

    "से.मी" yields "से", so the dot inside the running token "से.मी." is
    recognized as part of the abbreviation rather than a boundary.
    """
    stems = set()
    for prefix in prefixes:
        idx = prefix.find(".")
        while idx != -1:
            stems.add(prefix[:idx])
            idx = prefix.find(".", idx + 1)
    return frozenset(stems)


def _is_protected(line: str, pos: int, prefixes: frozenset[str]) -> bool:
    """Whether the period at ``pos`` must not end a sentence."""
    nxt = line[pos + 1] if pos + 1 < len(line) else ""
    if nxt.isdigit():
        return True
    token = _token_before(line, pos)
    if not token:
        return False
    if token in prefixes or token.isdigit():
        return True
    if nxt and not nxt.isspace() and token in _dotted_stems(prefixes):
        return True
    # Initials ("F. M. Last") and dotted acronyms ("U.S.") end in one letter.
    last = token.rsplit(".", 1)[-1]
    return len(last) == 1 and last.isalpha()


def _segment_line(line: str, prefixes: frozenset[str]) -> list[str]:
    sentences = []
    start = 0
    i = 0
    n = len(line)
    while i < n:
        if line[i] not in TERMINALS:
            i += 1
            continue
        j = i
        while j + 1 < n and line[j + 1] in TERMINALS:
            j += 1
        if i == j and line[i] == "." and _is_protected(line, i, prefixes):
            i = j + 1
            continue
        while j + 1 < n and line[j + 1] in _CLOSERS:
            j += 1
        sentences.append(line[start : j + 1])
        start = j + 1
        i = j + 1
    if start < n:
        sentences.append(line[start:])
    return sentences


def segment_sentences(
    text: str, lang: str = "en", prefixes: frozenset[str] | None = None
) -> list[str]:
    """Split ``text`` into sentences; empty input yields an empty list."""
    if prefixes is None:
        prefixes = load_prefixes(lang)
    out = []
    for line in text.splitlines():
        for sent in _segment_line(line, prefixes):
            sent = sent.strip()
            if sent:
                out.append(sent)
    return out


def _page_is_complete(page: str) -> bool:
    tail = page.rstrip()
    while tail and tail[-1] in _CLOSERS:
        tail = tail[:-1].rstrip()
    return bool(tail) and tail[-1] in TERMINALS


def _starts_continuation(page: str, lang: str) -> bool:
    if lang != "en":
        # Indic scripts have no case; an unterminated previous page suffices.
        return True
    head = page.lstrip()
    first = head[0] if head else ""
    return bool(first) and first not in _OPEN_QUOTES and not first.isupper()


def merge_page_fragments(pages: list[str] | tuple[str, ...], lang: str = "en") -> str:
    """Join OCR pages, bridging sentences broken across page boundaries.

    A page that ends mid-sentence is glued to the next page with a space when
    the next page reads as a continuation; otherwise a line break keeps the
    fragment from swallowing the following sentence.
    """
    parts = [p.strip() for p in pages if p.strip()]
    if not parts:
        return ""
    merged = parts[0]
    for part in parts[1:]:
        if _page_is_complete(merged) or _starts_continuation(part, lang):
            merged = f"{merged} {part}"
        else:
            merged = f"{merged}\n{part}"
    return merged
