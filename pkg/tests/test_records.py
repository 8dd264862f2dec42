import datetime

import pytest

from bitextmine.records import (
    BucketKey,
    SentenceRecord,
    SourceDocument,
    check_language,
    clean_cell,
    document_to_json,
    parse_document,
    read_sentences,
    write_sentences,
)


def test_check_language_accepts_registry():
    assert check_language("hi") == "hi"
    assert check_language("en") == "en"


@pytest.mark.parametrize("bad", ["", "EN", "xx", "english", "Hi"])
def test_check_language_rejects(bad):
    with pytest.raises(ValueError):
        check_language(bad)


def test_check_language_custom_registry():
    assert check_language("fr", registry={"fr", "de"}) == "fr"
    with pytest.raises(ValueError):
        check_language("hi", registry={"fr", "de"})


def test_bucket_key_month_validation():
    assert BucketKey.month(datetime.date(2021, 3, 4)).value == "2021-03"
    with pytest.raises(ValueError):
        BucketKey("month", "2021-13")
    with pytest.raises(ValueError):
        BucketKey("week", "2021-03")


def test_document_exactly_one_body():
    with pytest.raises(ValueError):
        SourceDocument(doc_id="d", lang="en")
    with pytest.raises(ValueError):
        SourceDocument(doc_id="d", lang="en", text="x", pages=("y",))


def test_document_json_roundtrip():
    doc = SourceDocument(
        doc_id="en-042",
        lang="en",
        text="Some text.",
        source="pib",
        published=datetime.date(2021, 3, 4),
        pair_key="pib-042",
    )
    assert parse_document(document_to_json(doc)) == doc


def test_document_json_roundtrip_pages():
    doc = SourceDocument(doc_id="d", lang="hi", pages=("page one", "page two"))
    assert parse_document(document_to_json(doc)) == doc


def test_clean_cell_collapses_whitespace():
    assert clean_cell("  a\tb\nc  ") == "a b c"


def test_sentence_tsv_roundtrip(tmp_path):
    records = [
        SentenceRecord("d1#0000", "d1", "en", "First sentence.", "2021-03"),
        SentenceRecord("d1#0001", "d1", "en", "Second one.", "2021-03"),
        SentenceRecord("d2#0000", "d2", "hi", "तीसरा वाक्य।", "*"),
    ]
    path = tmp_path / "sents.tsv"
    assert write_sentences(path, records) == 3
    assert read_sentences(path) == records


def test_sentence_tsv_embedded_tabs_are_cleaned(tmp_path):
    path = tmp_path / "sents.tsv"
    write_sentences(path, [SentenceRecord("d#0000", "d", "en", "a\tb", "*")])
    assert read_sentences(path)[0].text == "a b"


def test_read_sentences_rejects_bad_column_count(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("only\tthree\tcolumns\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_sentences(path)
