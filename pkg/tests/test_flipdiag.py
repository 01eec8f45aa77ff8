import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gak.errors import ArgmaxAmbiguous, ShapeError, ValidationWarning
from gak.flipdiag import (
    AttentionMatrix,
    Verdict,
    kendall_tau_a,
    monotonicity,
    render_heatmap,
    reversal_score,
)

from oracles import kendall_tau_pairs


def cross(values):
    values = np.asarray(values, dtype=np.float64)
    return AttentionMatrix(values / values.sum(axis=1, keepdims=True), kind="cross")


def self_att(values):
    return AttentionMatrix(np.asarray(values, dtype=np.float64), kind="self")


# --- monotonicity ---


def test_identity_is_forward():
    report = monotonicity(cross(np.eye(5)))
    assert report.kendall_tau == 1.0
    assert report.verdict is Verdict.FORWARD_MONOTONIC


def test_antidiagonal_is_reversed():
    report = monotonicity(cross(np.eye(5)[::-1]))
    assert report.kendall_tau == -1.0
    assert report.verdict is Verdict.TIME_REVERSED


def test_shuffled_argmax_case():
    # argmax frames (3,1,4,2,5): brute-force pair counting gives (7-3)/10
    values = np.full((5, 5), 0.01)
    for row, frame in enumerate([3, 1, 4, 2, 5]):
        values[row, frame - 1] = 1.0
    report = monotonicity(cross(values))
    assert report.argmax_frames == [2, 0, 3, 1, 4]
    assert report.kendall_tau == pytest.approx(kendall_tau_pairs([3, 1, 4, 2, 5]))
    assert report.kendall_tau == pytest.approx(0.4)
    assert report.verdict is Verdict.NON_MONOTONIC


def test_tau_matches_pair_counting_oracle():
    rng = np.random.default_rng(3)
    for _ in range(50):
        seq = rng.integers(0, 10, size=int(rng.integers(2, 9)))
        assert kendall_tau_a(seq) == pytest.approx(kendall_tau_pairs(list(seq)))


def test_column_reversal_negates_tau():
    rng = np.random.default_rng(11)
    for _ in range(100):
        values = rng.random(size=(int(rng.integers(2, 8)), int(rng.integers(2, 10))))
        base = monotonicity(cross(values))
        flipped = monotonicity(cross(values[:, ::-1]))
        assert flipped.kendall_tau == pytest.approx(-base.kendall_tau, abs=0.0)


def test_verdicts_swap_under_column_reversal():
    forward = np.eye(6)
    assert monotonicity(cross(forward)).verdict is Verdict.FORWARD_MONOTONIC
    assert monotonicity(cross(forward[:, ::-1])).verdict is Verdict.TIME_REVERSED


def test_constant_rows_warn():
    values = np.ones((3, 4)) / 4.0
    with pytest.warns(ArgmaxAmbiguous):
        report = monotonicity(AttentionMatrix(values, "cross"))
    assert report.argmax_frames == [0, 0, 0]


def test_unnormalized_cross_rows_warn():
    with pytest.warns(ValidationWarning):
        AttentionMatrix(np.ones((2, 3)), kind="cross")


def test_needs_two_rows():
    with pytest.raises(ShapeError):
        monotonicity(cross(np.ones((1, 4))))


# --- reversal_score ---


def test_identity_scores_minus_one():
    assert reversal_score(self_att(np.eye(8))) == pytest.approx(-1.0)
    assert reversal_score(self_att(np.eye(5))) == pytest.approx(-1.0)


def test_antidiagonal_scores_plus_one():
    assert reversal_score(self_att(np.eye(8)[::-1])) == pytest.approx(1.0)


def test_uniform_scores_zero():
    assert reversal_score(self_att(np.full((8, 8), 1 / 64))) == pytest.approx(0.0)


def test_antisymmetry_under_column_reversal():
    rng = np.random.default_rng(0)
    for _ in range(20):
        w = rng.random(size=(9, 9))
        assert reversal_score(self_att(w[:, ::-1])) == pytest.approx(
            -reversal_score(self_att(w)), abs=1e-12
        )


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), c=st.floats(1e-3, 1e3))
def test_scale_invariance(seed, c):
    rng = np.random.default_rng(seed)
    w = rng.random(size=(7, 7))
    assert reversal_score(self_att(c * w)) == pytest.approx(
        reversal_score(self_att(w)), abs=1e-9
    )


def test_energies_are_softmaxed_per_row():
    energies = np.zeros((6, 6))
    energies[np.arange(6), np.arange(6)[::-1]] = 50.0  # anti-diagonal peaks
    assert reversal_score(self_att(energies), energies=True) == pytest.approx(1.0)


def test_non_square_rejected():
    with pytest.raises(ShapeError):
        reversal_score(self_att(np.ones((3, 4))))


# --- render_heatmap ---


def fills_of(svg_text):
    return re.findall(r'fill="(#[0-9a-f]{6})"', svg_text)


def test_single_cell_single_rect(tmp_path):
    p = tmp_path / "one.svg"
    render_heatmap(np.array([[1.0]]), str(p))
    assert p.read_text().count("<rect") == 1


def test_distinct_values_distinct_fills(tmp_path):
    p = tmp_path / "four.svg"
    render_heatmap(np.array([[0.0, 1.0], [2.0, 3.0]]), str(p))
    fills = fills_of(p.read_text())
    assert len(fills) == 4 and len(set(fills)) == 4


def test_monotone_row_monotone_lightness(tmp_path):
    p = tmp_path / "row.svg"
    render_heatmap(np.array([[0.0, 1.0, 2.0, 3.0]]), str(p), color="grayscale")
    levels = [int(f[1:3], 16) for f in fills_of(p.read_text())]
    assert levels == sorted(levels) and len(set(levels)) == 4


def test_clip_percentile_compresses_floor(tmp_path):
    values = np.array([[-1e9, 0.0], [1.0, 2.0]])
    p = tmp_path / "c.svg"
    render_heatmap(values, str(p), color="grayscale", clip_percentile=50.0)
    levels = [int(f[1:3], 16) for f in fills_of(p.read_text())]
    # after clipping, the sentinel no longer crushes the rest to one level
    assert len(set(levels)) >= 3
