import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bitextmine.errors import ConfigError, DegenerateInput, LengthMismatch
from bitextmine.evaluation import (
    BAND_DEFINITE,
    BAND_MARGINAL,
    BAND_REJECT,
    BANDS,
    BATCH_SIZE,
    analysis_report,
    analysis_report_from_files,
    export_annotation_csv,
    export_annotation_key,
    import_annotations,
    las_band,
    spearman,
    stratified_sample,
)
from conftest import make_pair


def test_band_examples_at_075():
    assert las_band(0.86, 0.75) == BAND_DEFINITE
    assert las_band(0.80, 0.75) == BAND_MARGINAL
    assert las_band(0.70, 0.75) == BAND_REJECT
    assert las_band(0.60, 0.75) is None


def test_band_boundaries_inclusive_rules():
    t = 0.75
    assert las_band(t, t) == BAND_REJECT  # threshold itself rejects
    assert las_band(t - 0.1, t) == BAND_REJECT  # lower edge inclusive
    assert las_band(t + 0.1, t) == BAND_MARGINAL  # band edge belongs below
    assert las_band(1.0, t) == BAND_DEFINITE
    assert las_band(np.nextafter(t - 0.1, 0.0), t) is None


@settings(max_examples=300)
@given(
    las=st.floats(0.0, 1.0, allow_nan=False),
    threshold=st.floats(0.2, 0.89, allow_nan=False),
)
def test_bands_partition_their_range(las, threshold):
    band = las_band(las, threshold)
    if threshold - 0.1 <= las <= 1.0:
        assert band in BANDS
    else:
        assert band is None


def _pool(n_per_band=40, threshold=0.75):
    pairs = []
    rng = np.random.default_rng(1)
    spans = {
        BAND_REJECT: (threshold - 0.1, threshold),
        BAND_MARGINAL: (threshold + 1e-9, threshold + 0.1),
        BAND_DEFINITE: (threshold + 0.1 + 1e-9, 1.0),
    }
    i = 0
    for band, (lo, hi) in spans.items():
        for _ in range(n_per_band):
            las = float(rng.uniform(lo, hi))
            pairs.append(make_pair(src_id=f"en-{i:04d}", tgt_id=f"hi-{i:04d}", las=las))
            i += 1
    return pairs


def test_stratified_counts_and_batching():
    samples, warnings = stratified_sample(_pool(40), 0.75, n_per_band=20, seed=0)
    assert not warnings
    assert len(samples) == 60
    by_band = {band: 0 for band in BANDS}
    for s in samples:
        by_band[s.band] += 1
    assert by_band == {band: 20 for band in BANDS}
    assert [s.batch_id for s in samples] == [i // BATCH_SIZE for i in range(60)]
    assert samples[0].sample_id == "s00000"


def test_stratified_shortfall_warns_and_takes_all():
    pairs = _pool(3)
    samples, warnings = stratified_sample(pairs, 0.75, n_per_band=10, seed=0)
    assert len(samples) == 9
    assert len(warnings) == 3


def test_stratified_deterministic():
    a, _ = stratified_sample(_pool(40), 0.75, 15, seed=9)
    b, _ = stratified_sample(_pool(40), 0.75, 15, seed=9)
    assert a == b


def test_stratified_shuffles_bands():
    samples, _ = stratified_sample(_pool(40), 0.75, 20, seed=0)
    first_batch_bands = {s.band for s in samples[:30]}
    assert len(first_batch_bands) > 1


def test_stratified_validates_n():
    with pytest.raises(ConfigError):
        stratified_sample([], 0.75, 0)


def test_spearman_known_example():
    # one swapped neighbor in 4 points: rho = 1 - 6*2/(4*15) = 0.8
    assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-12)


def test_spearman_identical_and_reversed():
    xs = [3.0, 1.0, 4.0, 1.5, 5.0]
    assert spearman(xs, xs) == 1.0
    assert spearman(xs, [-x for x in xs]) == -1.0


def test_spearman_ties_average_ranks():
    # x has a tie; compare against the closed form on averaged ranks
    assert spearman([1, 1, 2], [1, 2, 3]) == pytest.approx(
        math.sqrt(3) / 2, abs=1e-12
    )


def test_spearman_errors():
    with pytest.raises(LengthMismatch):
        spearman([1, 2], [1, 2, 3])
    with pytest.raises(DegenerateInput):
        spearman([1], [1])
    with pytest.raises(DegenerateInput):
        spearman([2, 2, 2], [1, 2, 3])


def _brute_spearman(xs, ys):
    def ranks(vals):
        order = sorted(range(len(vals)), key=lambda i: vals[i])
        r = [0.0] * len(vals)
        i = 0
        while i < len(order):
            j = i
            while j + 1 < len(order) and vals[order[j + 1]] == vals[order[i]]:
                j += 1
            avg = (i + j) / 2 + 1
            for t in range(i, j + 1):
                r[order[t]] = avg
            i = j + 1
        return r

    import statistics

    return statistics.correlation(ranks(xs), ranks(ys))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_spearman_matches_bruteforce(seed):
    rng = np.random.default_rng(seed)
    xs = rng.integers(0, 20, 30).astype(float).tolist()  # plenty of ties
    ys = rng.standard_normal(30).tolist()
    assert spearman(xs, ys) == pytest.approx(_brute_spearman(xs, ys), abs=1e-12)


def test_annotation_csv_roundtrip(tmp_path):
    samples, _ = stratified_sample(_pool(10), 0.75, 5, seed=0)
    csv_path = tmp_path / "a.csv"
    key_path = tmp_path / "k.csv"
    export_annotation_csv(samples, csv_path)
    export_annotation_key(samples, key_path)
    with open(csv_path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 15
    assert set(rows[0]) == {"sample_id", "batch_id", "src_text", "tgt_text"}
    with open(key_path, newline="", encoding="utf-8") as f:
        key_rows = list(csv.DictReader(f))
    assert {r["band"] for r in key_rows} == set(BANDS)


def test_import_annotations_validates(tmp_path):
    path = tmp_path / "ann.csv"
    path.write_text("sample_id,annotator_id,sts\ns00000,a1,5\n", encoding="utf-8")
    assert import_annotations(path) == [("s00000", "a1", 5)]
    path.write_text("sample_id,annotator_id,sts\ns00000,a1,7\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        import_annotations(path)
    path.write_text("sample_id,sts\ns00000,5\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        import_annotations(path)


def _annotations_for(samples, sts_of):
    out = []
    for s in samples:
        for annotator, score in enumerate(sts_of(s)):
            out.append((s.sample_id, f"a{annotator}", score))
    return out


def test_analysis_report_basic_stats():
    samples, _ = stratified_sample(_pool(10), 0.75, 5, seed=0)
    sts_by_band = {BAND_REJECT: [1, 2], BAND_MARGINAL: [4, 4], BAND_DEFINITE: [5, 5]}
    annotations = _annotations_for(samples, lambda s: sts_by_band[s.band])
    report = analysis_report(samples, annotations)
    overall = report["overall"]
    assert report["annotated_samples"] == 15
    assert overall["bands"][BAND_DEFINITE]["mean_sts"] == 5.0
    assert overall["bands"][BAND_DEFINITE]["accuracy"] == 1.0
    assert overall["bands"][BAND_REJECT]["accuracy"] == 0.0
    assert overall["all_accept"]["pooled"]["count"] == 10
    assert overall["all_accept"]["balanced"]["accuracy"] == 1.0
    assert overall["agreement_within_1"] == 1.0
    assert overall["correlations"]["las_sts"] > 0.5
    assert list(report["by_language"]) == ["hi"]


def test_analysis_report_unknown_sample_rejected():
    samples, _ = stratified_sample(_pool(10), 0.75, 2, seed=0)
    with pytest.raises(ConfigError):
        analysis_report(samples, [("sZZZZZ", "a1", 3)])


def test_analysis_report_skips_unannotated():
    samples, _ = stratified_sample(_pool(10), 0.75, 4, seed=0)
    annotations = [(samples[0].sample_id, "a1", 4)]
    report = analysis_report(samples, annotations)
    assert report["annotated_samples"] == 1
    assert report["total_samples"] == 12
    assert report["overall"]["agreement_within_1"] is None  # single annotator


def test_analysis_report_from_files_matches_in_memory(tmp_path):
    samples, _ = stratified_sample(_pool(10), 0.75, 5, seed=0)
    key_path = tmp_path / "k.csv"
    ann_path = tmp_path / "a.csv"
    export_annotation_key(samples, key_path)
    annotations = _annotations_for(samples, lambda s: [3, 4])
    with open(ann_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["sample_id", "annotator_id", "sts"])
        writer.writerows(annotations)
    from_files = analysis_report_from_files(key_path, ann_path)
    in_memory = analysis_report(samples, annotations)
    assert from_files["overall"]["bands"] == in_memory["overall"]["bands"]
    assert from_files["annotated_samples"] == in_memory["annotated_samples"]
