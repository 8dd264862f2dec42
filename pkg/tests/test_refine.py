import pytest

from bitextmine.errors import ConfigError, DetectorUnavailable
from bitextmine.refine import (
    FilterConfig,
    HeldoutSets,
    build_pivot_groups,
    decontaminate,
    dedup_exact,
    filter_langid,
    filter_min_length,
    load_heldout,
    normalize_for_overlap,
    pivot_extract,
    refine_pipeline,
    write_pivot_pairs,
)
from conftest import make_pair


class FakeDetector:
    """Deterministic stand-in: trusts a text -> lang table, else the tag."""

    def __init__(self, table=None, broken=False):
        self.table = table or {}
        self.broken = broken

    def detect(self, text, expected=None):
        if self.broken:
            raise DetectorUnavailable("no profiles")
        return self.table.get(text, expected), 0.9


def test_filter_config_validation():
    with pytest.raises(ConfigError):
        FilterConfig(min_en_words=0)


def test_min_length_counts_whitespace_words():
    short = make_pair(src_text="only three words")
    exact = make_pair(src_text="now exactly four words", tgt_id="hi-2")
    kept = filter_min_length([short, exact], min_en_words=4)
    assert kept == [exact]


def test_min_length_en_on_target_side():
    pair = make_pair(
        src_id="hi-1", tgt_id="en-1",
        src_lang="hi", tgt_lang="en",
        src_text="हिंदी", tgt_text="too few here",
    )
    assert filter_min_length([pair]) == []


def test_min_length_passes_non_english_pairs():
    pair = make_pair(src_lang="hi", tgt_lang="ta", src_text="अ", tgt_text="அ")
    assert filter_min_length([pair]) == [pair]


def test_dedup_keeps_first_drops_later():
    a = make_pair(src_id="en-1", tgt_id="hi-1", las=0.9)
    b = make_pair(src_id="en-2", tgt_id="hi-2", las=0.8)  # same texts as a
    c = make_pair(src_id="en-3", tgt_id="hi-3", tgt_text="different", las=0.7)
    kept = dedup_exact([a, b, c])
    assert kept == [a, c]


def test_dedup_requires_both_sides_equal():
    a = make_pair()
    b = make_pair(tgt_id="hi-2", tgt_text="other target")
    assert dedup_exact([a, b]) == [a, b]


def test_langid_drops_mismatched_side():
    good = make_pair()
    bad = make_pair(tgt_id="hi-2", tgt_text="this is english actually")
    detector = FakeDetector({"this is english actually": "en"})
    kept, warning = filter_langid([good, bad], detector=detector)
    assert kept == [good]
    assert warning is None


def test_langid_soft_skip_on_unavailable():
    pairs = [make_pair()]
    kept, warning = filter_langid(pairs, detector=FakeDetector(broken=True))
    assert kept == pairs
    assert "skipped" in warning


def test_langid_hard_fail():
    with pytest.raises(DetectorUnavailable):
        filter_langid([make_pair()], detector=FakeDetector(broken=True), hard_fail=True)


def test_normalize_for_overlap():
    assert normalize_for_overlap("Hello,  World!") == "hello world"
    assert normalize_for_overlap("क्या? हाँ।") == "क्या हाँ"
    assert normalize_for_overlap("A.B.C.") == "abc"


def test_load_heldout_and_shape(tmp_path):
    (tmp_path / "wat2021.en.txt").write_text("Hello, World!\n", encoding="utf-8")
    (tmp_path / "en-hi.hi.txt").write_text("नमस्ते!\n\n", encoding="utf-8")
    held = load_heldout(tmp_path)
    assert held.sets[("wat2021", "en")] == {"hello world"}
    assert held.tgt_side("hi") == {"नमस्ते"}
    assert held.tgt_side("ta") is None


def test_load_heldout_bad_name(tmp_path):
    (tmp_path / "plain.txt").write_text("x\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_heldout(tmp_path)


def test_decontaminate_en_side_any_set():
    held = HeldoutSets({("wat2021", "en"): {"hello world"}, ("en-hi", "hi"): set()})
    dirty = make_pair(src_text="Hello, World!")
    clean = make_pair(tgt_id="hi-2", src_text="completely novel sentence here")
    kept, counts = decontaminate([dirty, clean], held)
    assert kept == [clean]
    assert counts == {"wat2021.en": 1, "en-hi.hi": 0}


def test_decontaminate_tgt_side_own_pair_only():
    held = HeldoutSets({("en-hi", "hi"): {normalize_for_overlap("नमस्ते")}})
    hi_pair = make_pair(tgt_text="नमस्ते!")
    ta_pair = make_pair(tgt_id="ta-1", tgt_lang="ta", tgt_text="नमस्ते!")
    kept, counts = decontaminate([hi_pair, ta_pair], held)
    # the ta pair survives: the held-out set is for en-hi's hi side only
    assert kept == [ta_pair]
    assert counts["en-hi.hi"] == 1


def test_decontaminate_idempotent():
    held = HeldoutSets({("wat2021", "en"): {"hello world"}})
    pairs = [make_pair(src_text="Hello World"), make_pair(tgt_id="hi-2")]
    once, _ = decontaminate(pairs, held)
    twice, counts = decontaminate(once, held)
    assert twice == once
    assert counts["wat2021.en"] == 0


def _pivot_corpora():
    shared = "The minister opened a new road."
    corpus_a = [
        make_pair(src_id="en-1", tgt_id="hi-1", src_text=shared, tgt_text="hi one", las=0.90),
        make_pair(src_id="en-2", tgt_id="hi-2", src_text="  The minister opened a   new road. ", tgt_text="hi two", las=0.85),
    ]
    corpus_b = [
        make_pair(src_id="en-3", tgt_id="ta-1", tgt_lang="ta", src_text=shared, tgt_text="ta one", las=0.95),
        make_pair(src_id="en-4", tgt_id="ta-2", tgt_lang="ta", src_text=shared, tgt_text="ta two", las=0.80),
        make_pair(src_id="en-5", tgt_id="ta-3", tgt_lang="ta", src_text=shared, tgt_text="ta three", las=0.88),
    ]
    return corpus_a, corpus_b


def test_pivot_groups_match_on_collapsed_whitespace():
    corpus_a, corpus_b = _pivot_corpora()
    groups = build_pivot_groups(corpus_a, corpus_b)
    assert len(groups) == 1
    assert len(groups[0].left) == 2 and len(groups[0].right) == 3


def test_pivot_emits_one_pair_per_group_las_min():
    corpus_a, corpus_b = _pivot_corpora()
    out = pivot_extract(corpus_a, corpus_b, seed=3)
    assert len(out) == 1
    pair = out[0]
    assert pair.mode == "pivot" and pair.bucket == "*"
    assert pair.src_lang == "hi" and pair.tgt_lang == "ta"
    left = {"hi-1": 0.90, "hi-2": 0.85}[pair.src_id]
    right = {"ta-1": 0.95, "ta-2": 0.80, "ta-3": 0.88}[pair.tgt_id]
    assert pair.las == min(left, right)
    assert pair.left_provenance == "comparable:2021-03"


def test_pivot_deterministic_under_seed():
    corpus_a, corpus_b = _pivot_corpora()
    assert pivot_extract(corpus_a, corpus_b, seed=7) == pivot_extract(
        corpus_a, corpus_b, seed=7
    )


def test_pivot_draw_is_uniform_over_mn():
    corpus_a, corpus_b = _pivot_corpora()
    seen = set()
    for seed in range(200):
        pair = pivot_extract(corpus_a, corpus_b, seed=seed)[0]
        seen.add((pair.src_id, pair.tgt_id))
    assert len(seen) == 6  # all m*n combinations show up across seeds


def test_write_pivot_pairs_nine_columns(tmp_path):
    corpus_a, corpus_b = _pivot_corpora()
    out = pivot_extract(corpus_a, corpus_b, seed=0)
    path = tmp_path / "pivot.tsv"
    write_pivot_pairs(path, out)
    line = path.read_text(encoding="utf-8").splitlines()[0]
    assert len(line.split("\t")) == 9


def test_refine_pipeline_order_and_report(tmp_path):
    (tmp_path / "wat2021.en.txt").write_text(
        "a heldout english sentence here\n", encoding="utf-8"
    )
    held = load_heldout(tmp_path)
    pairs = [
        make_pair(src_id="en-1", tgt_id="hi-1", src_text="too short"),
        make_pair(src_id="en-2", tgt_id="hi-2", src_text="a heldout english sentence here"),
        make_pair(src_id="en-3", tgt_id="hi-3", src_text="a unique full length sentence"),
        make_pair(src_id="en-4", tgt_id="hi-4", src_text="a unique full length sentence"),
    ]
    cfg = FilterConfig(langid_enabled=False)
    kept, report = refine_pipeline(pairs, cfg, heldout=held)
    assert [p.src_id for p in kept] == ["en-3"]
    names = [f["filter"] for f in report["filters_applied"]]
    assert names == ["min_length", "decontaminate", "dedup"]
    assert report["input"] == 4 and report["output"] == 1


def test_refine_pipeline_langid_warning_recorded():
    kept, report = refine_pipeline(
        [make_pair()], FilterConfig(), detector=FakeDetector(broken=True)
    )
    assert len(kept) == 1
    assert report["warnings"]
    langid_entry = [f for f in report["filters_applied"] if f["filter"] == "langid"][0]
    assert langid_entry["skipped"] is True
