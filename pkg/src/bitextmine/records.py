"""Core record types plus the JSONL / TSV formats they travel in.

Documents arrive as JSON lines (one :class:`SourceDocument` per line);
segmented sentences leave as a 4-column TSV ``sent_id  lang  bucket  text``.
"""
from __future__ import annotations

import datetime
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

INDIC_LANGUAGES = ("as", "bn", "gu", "hi", "kn", "ml", "mr", "or", "pa", "ta", "te")
DEFAULT_LANGUAGES = frozenset(("en",) + INDIC_LANGUAGES)

_MONTH_RE = re.compile(r"^\d{4}-(0[1-9]|1[0-2])$")


def check_language(tag: str, registry: frozenset[str] | set[str] | None = None) -> str:
    """Validate a language code against the run's registered set."""
    langs = DEFAULT_LANGUAGES if registry is None else registry
    if not tag or tag != tag.lower() or tag not in langs:
        raise ValueError(f"unknown or malformed language code: {tag!r}")
    return tag


@dataclass(frozen=True)
class BucketKey:
    """Candidate-restriction bucket: a month, a document pair key, or global."""

    kind: str  # month | document_pair | global
    value: str

    def __post_init__(self):
        if self.kind not in ("month", "document_pair", "global"):
            raise ValueError(f"unknown bucket kind: {self.kind!r}")
        if self.kind == "month" and not _MONTH_RE.match(self.value):
            raise ValueError(f"month bucket must be YYYY-MM, got {self.value!r}")

    @classmethod
    def month(cls, date: datetime.date) -> "BucketKey":
        return cls("month", f"{date.year:04d}-{date.month:02d}")

    @classmethod
    def document_pair(cls, pair_key: str) -> "BucketKey":
        return cls("document_pair", pair_key)

    @classmethod
    def global_(cls) -> "BucketKey":
        return cls("global", "*")


@dataclass(frozen=True)
class SourceDocument:
    """One extracted document; exactly one of text/pages is populated."""

    doc_id: str
    lang: str
    text: str | None = None
    source: str = ""
    published: datetime.date | None = None
    pair_key: str | None = None
    pages: tuple[str, ...] | None = None

    def __post_init__(self):
        if (self.text is None) == (self.pages is None):
            raise ValueError(
                f"document {self.doc_id!r}: exactly one of text/pages must be set"
            )


@dataclass(frozen=True)
class SentenceRecord:
    """One segmented sentence with language, provenance and bucket value."""

    sent_id: str
    doc_id: str
    lang: str
    text: str
    bucket: str


def parse_document(line: str) -> SourceDocument:
    obj = json.loads(line)
    published = obj.get("published")
    if published is not None:
        published = datetime.date.fromisoformat(published)
    pages = obj.get("pages")
    return SourceDocument(
        doc_id=obj["doc_id"],
        lang=obj["lang"],
        text=obj.get("text"),
        source=obj.get("source", ""),
        published=published,
        pair_key=obj.get("pair_key"),
        pages=tuple(pages) if pages is not None else None,
    )


def read_documents(path: str | Path) -> Iterator[SourceDocument]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield parse_document(line)


def document_to_json(doc: SourceDocument) -> str:
    obj: dict = {"doc_id": doc.doc_id, "lang": doc.lang}
    if doc.text is not None:
        obj["text"] = doc.text
    if doc.pages is not None:
        obj["pages"] = list(doc.pages)
    if doc.source:
        obj["source"] = doc.source
    if doc.published is not None:
        obj["published"] = doc.published.isoformat()
    if doc.pair_key is not None:
        obj["pair_key"] = doc.pair_key
    return json.dumps(obj, ensure_ascii=False)


_WS = re.compile(r"\s+")


def clean_cell(text: str) -> str:
    """Collapse whitespace so a sentence fits in one TSV cell."""
    return _WS.sub(" ", text).strip()


def write_sentences(path: str | Path, records: Iterable[SentenceRecord]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(f"{rec.sent_id}\t{rec.lang}\t{rec.bucket}\t{clean_cell(rec.text)}\n")
            n += 1
    return n


def read_sentences(path: str | Path) -> list[SentenceRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}:{i + 1}: expected 4 TSV columns, got {len(parts)}")
            sent_id, lang, bucket, text = parts
            records.append(SentenceRecord(sent_id, sent_id.split("#")[0], lang, text, bucket))
    return records
