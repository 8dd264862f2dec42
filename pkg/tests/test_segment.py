import re

from hypothesis import given, settings
from hypothesis import strategies as st

from bitextmine.segment import (
    load_prefixes,
    merge_page_fragments,
    segment_sentences,
)

EN_PREFIXES = load_prefixes("en")


def test_basic_split():
    text = "The cabinet met today. It approved three proposals."
    assert segment_sentences(text) == [
        "The cabinet met today.",
        "It approved three proposals.",
    ]


def test_question_and_exclamation():
    assert segment_sentences("Really? Yes! Good.") == ["Really?", "Yes!", "Good."]


def test_danda_and_double_danda():
    text = "यह पहला वाक्य है। यह दूसरा है॥ तीसरा भी।"
    assert segment_sentences(text, lang="hi") == [
        "यह पहला वाक्य है।",
        "यह दूसरा है॥",
        "तीसरा भी।",
    ]


def test_prefix_not_split():
    text = "Dr. Sharma visited the ward. He left at noon."
    assert segment_sentences(text) == [
        "Dr. Sharma visited the ward.",
        "He left at noon.",
    ]


def test_initials_not_split():
    text = "The report cites A. P. J. Abdul Kalam. It was filed yesterday."
    assert segment_sentences(text) == [
        "The report cites A. P. J. Abdul Kalam.",
        "It was filed yesterday.",
    ]


def test_decimal_and_numbered_list_not_split():
    assert segment_sentences("Inflation hit 6.1 percent.") == [
        "Inflation hit 6.1 percent."
    ]
    assert segment_sentences("Section 12. applies here.") == [
        "Section 12. applies here."
    ]


def test_ellipsis_and_runs_of_terminals():
    assert segment_sentences("Wait… what?! Fine.") == ["Wait…", "what?!", "Fine."]


def test_closing_quote_attaches():
    text = 'He said "stop." Then he left.'
    assert segment_sentences(text) == ['He said "stop."', "Then he left."]


def test_linebreak_is_boundary():
    assert segment_sentences("no terminal here\nsecond line") == [
        "no terminal here",
        "second line",
    ]


def test_empty_and_whitespace():
    assert segment_sentences("") == []
    assert segment_sentences("  \n  \t ") == []


def test_indic_prefixes_inherit_english():
    prefixes = load_prefixes("hi")
    assert "Dr" in prefixes


def test_dot_inside_dotted_prefix_does_not_split():
    text = "दूरी से.मी. में नापी गई। अगला वाक्य।"
    assert segment_sentences(text, lang="hi") == [
        "दूरी से.मी. में नापी गई।",
        "अगला वाक्य।",
    ]
    assert segment_sentences("Use e.g. the side door. Then knock.") == [
        "Use e.g. the side door.",
        "Then knock.",
    ]


def test_merge_pages_bridges_broken_sentence():
    pages = ["The committee met on Friday and", "decided to adjourn. A new date was set."]
    merged = merge_page_fragments(pages)
    sents = segment_sentences(merged)
    assert sents[0] == "The committee met on Friday and decided to adjourn."


def test_merge_pages_keeps_fresh_sentence_apart():
    # Second page starts a new sentence: do not glue it onto the fragment.
    pages = ["a dangling fragment without end", "The next page starts fresh."]
    merged = merge_page_fragments(pages)
    assert "fragment without end\nThe next page" in merged


def test_merge_pages_empty():
    assert merge_page_fragments(()) == ""
    assert merge_page_fragments(("", "  ")) == ""


_WS = re.compile(r"\s+")


def _collapse(text: str) -> str:
    return _WS.sub(" ", text).strip()


words = st.sampled_from(
    "the committee approved budget farmers market rainfall students railway "
    "सरकार बजट किसान बाजार विद्यार्थी ಮಳೆ ರೈತರು வணிகம் மாணவர்".split()
)
sentence = st.builds(
    lambda ws, term: " ".join(ws) + term,
    st.lists(words, min_size=1, max_size=8),
    st.sampled_from([".", "?", "!", "।"]),
)


@settings(max_examples=200)
@given(st.lists(sentence, min_size=1, max_size=6))
def test_roundtrip_property(sents):
    text = " ".join(sents)
    assert _collapse(" ".join(segment_sentences(text))) == _collapse(text)


@settings(max_examples=200)
@given(
    st.lists(words, min_size=1, max_size=5),
    st.sampled_from(sorted(EN_PREFIXES)),
    st.lists(words, min_size=1, max_size=5),
)
def test_prefix_never_ends_sentence(before, prefix, after):
    text = " ".join(before) + f" {prefix}. " + " ".join(after) + "."
    for sent in segment_sentences(text):
        assert not sent.endswith(f"{prefix}.") or sent == text
