"""Turn extracted documents into segmented, bucketed sentence records."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .errors import MissingMetadata
from .records import BucketKey, SentenceRecord, SourceDocument
from .segment import merge_page_fragments, segment_sentences


@dataclass
class IngestReport:
    docs_read: int = 0
    docs_emitted: int = 0
    docs_skipped: int = 0
    sentences: int = 0
    sentences_by_lang: dict[str, int] = field(default_factory=dict)
    errors: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "docs_read": self.docs_read,
            "docs_emitted": self.docs_emitted,
            "docs_skipped": self.docs_skipped,
            "sentences": self.sentences,
            "sentences_by_lang": dict(sorted(self.sentences_by_lang.items())),
            "errors": self.errors,
        }


def bucket_for(doc: SourceDocument, kind: str) -> BucketKey:
    """Derive the document's bucket, raising MissingMetadata when it can't."""
    if kind == "month":
        if doc.published is None:
            raise MissingMetadata(f"document {doc.doc_id!r} has no published date")
        return BucketKey.month(doc.published)
    if kind == "document_pair":
        if not doc.pair_key:
            raise MissingMetadata(f"document {doc.doc_id!r} has no pair_key")
        return BucketKey.document_pair(doc.pair_key)
    if kind == "global":
        return BucketKey.global_()
    raise ValueError(f"unknown bucketing kind: {kind!r}")


def ingest(
    docs: Iterable[SourceDocument], bucketing: str = "global"
) -> tuple[list[SentenceRecord], IngestReport]:
    """Segment each document and emit one record per sentence.

    Documents missing the metadata the bucketing mode needs are skipped and
    counted in the report rather than aborting the run.
    """
    report = IngestReport()
    records: list[SentenceRecord] = []
    seen_docs: set[str] = set()
    for doc in docs:
        report.docs_read += 1
        if doc.doc_id in seen_docs:
            report.docs_skipped += 1
            report.errors.append({"doc_id": doc.doc_id, "error": "duplicate_doc_id"})
            continue
        seen_docs.add(doc.doc_id)
        try:
            bucket = bucket_for(doc, bucketing)
        except MissingMetadata as exc:
            report.docs_skipped += 1
            report.errors.append({"doc_id": doc.doc_id, "error": "missing_metadata", "detail": str(exc)})
            continue
        text = doc.text if doc.text is not None else merge_page_fragments(doc.pages, doc.lang)
        sentences = segment_sentences(text, doc.lang)
        for i, sent in enumerate(sentences):
            records.append(
                SentenceRecord(
                    sent_id=f"{doc.doc_id}#{i:04d}",
                    doc_id=doc.doc_id,
                    lang=doc.lang,
                    text=sent,
                    bucket=bucket.value,
                )
            )
        report.docs_emitted += 1
        report.sentences += len(sentences)
        report.sentences_by_lang[doc.lang] = (
            report.sentences_by_lang.get(doc.lang, 0) + len(sentences)
        )
    return records, report
