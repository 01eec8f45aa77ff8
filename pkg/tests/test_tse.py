import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gak.errors import FormatError, SequenceMismatch, WordMismatch
from gak.tse import WordAlignment, compute_tse, merge_reports, parse_alignment


def align(entries):
    return WordAlignment(list(entries))


@st.composite
def alignments(draw, n_min=1, n_max=6):
    n = draw(st.integers(n_min, n_max))
    t = 0.0
    entries = []
    for i in range(n):
        t += draw(st.floats(0.0, 100.0))
        dur = draw(st.floats(1.0, 500.0))
        entries.append((f"w{i}", t, t + dur))
        t += dur
    return align(entries)


# --- parse_alignment ---


def test_parse_basic(tmp_path):
    p = tmp_path / "a.tsv"
    p.write_text("hello\t0\t300\nworld\t300\t600\n")
    assert parse_alignment(p).entries == [("hello", 0.0, 300.0), ("world", 300.0, 600.0)]


def test_parse_drops_silence(tmp_path):
    p = tmp_path / "a.tsv"
    p.write_text("<sil>\t0\t100\nhello\t100\t300\n")
    assert parse_alignment(p).words == ["hello"]


def test_parse_rejects_bad_span(tmp_path):
    p = tmp_path / "a.tsv"
    p.write_text("hello\t300\t300\n")
    with pytest.raises(FormatError):
        parse_alignment(p)


def test_parse_rejects_overlap(tmp_path):
    p = tmp_path / "a.tsv"
    p.write_text("a\t0\t300\nb\t200\t400\n")
    with pytest.raises(FormatError):
        parse_alignment(p)


# --- compute_tse ---


def test_identity_is_zero():
    x = align([("a", 0, 300), ("b", 320, 500)])
    report = compute_tse(x, x)
    assert (report.boundary_tse_ms, report.center_tse_ms) == (0.0, 0.0)


def test_uniform_shift():
    ref = align([("a", 0, 300), ("b", 320, 500)])
    hyp = align([("a", 60, 360), ("b", 380, 560)])
    report = compute_tse(hyp, ref)
    assert report.boundary_tse_ms == pytest.approx(60.0)
    assert report.center_tse_ms == pytest.approx(60.0)


def test_hand_worked_two_word_case():
    ref = align([("w1", 0, 300), ("w2", 300, 600)])
    hyp = align([("w1", 60, 300), ("w2", 360, 540)])
    report = compute_tse(hyp, ref)
    assert report.boundary_tse_ms == pytest.approx(45.0)
    assert report.center_tse_ms == pytest.approx(15.0)


def test_count_and_text_mismatches():
    one = align([("a", 0, 100)])
    two = align([("a", 0, 100), ("b", 100, 200)])
    with pytest.raises(SequenceMismatch):
        compute_tse(one, two)
    q = align([("x", 0, 100)])
    with pytest.raises(WordMismatch):
        compute_tse(one, q)
    report = compute_tse(one, q, match_mode="by-index")
    assert report.boundary_tse_ms == 0.0


def test_text_match_is_case_insensitive():
    a = align([("Hello", 0, 100)])
    b = align([("hello", 10, 110)])
    assert compute_tse(a, b).boundary_tse_ms == pytest.approx(10.0)


@settings(max_examples=50, deadline=None)
@given(hyp=alignments(), k=st.floats(1.0, 5000.0))
def test_translation_equivariance(hyp, k):
    shifted = align([(w, s + k, e + k) for w, s, e in hyp.entries])
    report = compute_tse(shifted, hyp)
    assert report.boundary_tse_ms == pytest.approx(k, rel=1e-12)
    assert report.center_tse_ms == pytest.approx(k, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_symmetry_and_center_bound(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    def sample():
        t, entries = 0.0, []
        for i in range(n):
            t += float(rng.uniform(0, 200))
            dur = float(rng.uniform(1, 300))
            entries.append((f"w{i}", t, t + dur))
            t += dur
        return align(entries)
    a, b = sample(), sample()
    ab = compute_tse(a, b)
    ba = compute_tse(b, a)
    assert ab.boundary_tse_ms == pytest.approx(ba.boundary_tse_ms, rel=1e-12)
    assert ab.center_tse_ms == pytest.approx(ba.center_tse_ms, rel=1e-12)
    # |d_center| <= (|d_start| + |d_end|) / 2 per word, hence also in the mean
    assert ab.center_tse_ms <= ab.boundary_tse_ms + 1e-9


def test_merge_micro_averages():
    r1 = compute_tse(align([("a", 10, 100)]), align([("a", 0, 100)]))
    r2 = compute_tse(
        align([("b", 0, 100), ("c", 100, 200)]), align([("b", 0, 100), ("c", 100, 200)])
    )
    merged = merge_reports([r1, r2])
    assert merged.n_words == 3
    assert merged.boundary_tse_ms == pytest.approx(10.0 / 6.0)
    assert merged.center_tse_ms == pytest.approx(5.0 / 3.0)
