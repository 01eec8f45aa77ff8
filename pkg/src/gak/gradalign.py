"""Forced alignment of a per-label score matrix via dynamic programming.

The search runs over a blank-augmented state sequence
``Y = (eps, 1, eps, 2, ..., S', eps)`` with ``2*S' + 1`` states: odd state
indices are optional blanks, even indices are the real labels in order.
Paths may stay in a state, advance by one, or skip from a label state
directly to the next label state -- the skip is legal even when the two
labels are equal, which is where this topology differs from standard CTC.
Any accepted path starts in state 1 or 2, ends in state 2S' or 2S'+1, and
therefore visits every label state exactly once as one contiguous run.

Label states score ``scores[label, t]`` at frame t (normally the per-row
log-softmax over time of a saliency matrix); blank states score a fixed
``blank_score``. The best path maximizes the per-frame sum and is found
by Viterbi search with deterministic tie-breaking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRow, EmptyLabels, InfeasibleLength, ShapeError
from .labels import DEFAULT_CONTINUATION_MARKER, LabelSequence

BLANK_TOKEN = "<eps>"

# Blank score defaults are tied to the frame shift.
DEFAULT_BLANK_SCORES = {60: -4.0, 10: -6.0}
FALLBACK_BLANK_SCORE = -4.0


def default_blank_score(frame_shift_ms: int) -> float:
    return DEFAULT_BLANK_SCORES.get(frame_shift_ms, FALLBACK_BLANK_SCORE)


@dataclass
class ScoreMatrix:
    """S' x T per-label, per-frame scores plus frame-shift metadata."""

    values: np.ndarray
    frame_shift_ms: int

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ShapeError(f"score matrix must be rank 2, got {self.values.ndim}")


@dataclass(frozen=True)
class Topology:
    """Blank-augmented label topology with a free label-to-label skip."""

    n_labels: int

    @property
    def n_states(self) -> int:
        return 2 * self.n_labels + 1

    @property
    def start_states(self) -> tuple[int, int]:
        return (1, 2)

    @property
    def end_states(self) -> tuple[int, int]:
        return (2 * self.n_labels, 2 * self.n_labels + 1)

    @staticmethod
    def is_label_state(state: int) -> bool:
        return state % 2 == 0

    @staticmethod
    def label_index(state: int) -> int:
        """1-indexed label position for a label state."""
        return state // 2

    def successors(self, state: int) -> tuple[int, ...]:
        succ = [state, state + 1]
        if self.is_label_state(state):
            succ.append(state + 2)
        return tuple(s for s in succ if s <= self.n_states)


@dataclass
class AlignmentPath:
    """Best state path with its per-frame labels and derived segments.

    States and frames are 1-indexed; ``label_segments`` holds inclusive
    (token, start_frame, end_frame) spans, one per label occurrence;
    ``word_segments`` holds (word, start_ms, end_ms) with frame t covering
    [(t-1)*shift, t*shift) ms.
    """

    states: list[int]
    frame_labels: list[str]
    score: float
    label_segments: list[tuple[str, int, int]]
    word_segments: list[tuple[str, float, float]] = field(default_factory=list)


def time_log_softmax(matrix: ScoreMatrix, floor_value: float | None = None) -> ScoreMatrix:
    """Log-softmax of every score row over the time axis.

    Raises:
        DegenerateRow: a row consists entirely of the floor sentinel, so
            the softmax would be uniform over sentinels.
    """
    values = matrix.values
    if values.shape[0] < 1 or values.shape[1] < 1:
        raise ShapeError(f"empty score matrix {values.shape}")
    if floor_value is not None:
        floored = np.all(values <= floor_value, axis=1)
        if floored.any():
            raise DegenerateRow(f"row {int(np.argmax(floored))} entirely at floor")
    shifted = values - values.max(axis=1, keepdims=True)
    norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    return ScoreMatrix(values=shifted - norm, frame_shift_ms=matrix.frame_shift_ms)


def viterbi_align(
    scores: ScoreMatrix,
    labels: LabelSequence,
    blank_score: float | None = None,
) -> AlignmentPath:
    """Best topology-valid state path through the score matrix.

    Ties between equal-scoring predecessors prefer stay over advance over
    skip; an end-state tie prefers the final label state over the final
    blank. ``blank_score`` defaults to the frame-shift-specific value.

    Raises:
        EmptyLabels: no labels.
        InfeasibleLength: fewer frames than labels.
        ShapeError: score row count does not match the label count.
    """
    n_labels = len(labels)
    values = scores.values
    t_frames = values.shape[1]
    if values.shape[0] != n_labels:
        raise ShapeError(f"{values.shape[0]} score rows for {n_labels} labels")
    if t_frames < n_labels:
        raise InfeasibleLength(f"T={t_frames} < S'={n_labels}")
    if blank_score is None:
        blank_score = default_blank_score(scores.frame_shift_ms)

    topo = Topology(n_labels)
    n_states = topo.n_states
    # emit[r-1, t-1]: blank_score for odd states, label score for even ones.
    emit = np.full((n_states, t_frames), blank_score)
    emit[1::2, :] = values

    neg_inf = -math.inf
    dp = np.full(n_states, neg_inf)
    for s in topo.start_states:
        dp[s - 1] = emit[s - 1, 0]
    # back[t-1, r-1] in {0: stay, 1: advance, 2: skip}; -1 unreachable.
    back = np.full((t_frames, n_states), -1, dtype=np.int8)
    back[0, 0] = back[0, 1] = 0

    stay = np.empty(n_states)
    advance = np.empty(n_states)
    skip = np.empty(n_states)
    for t in range(1, t_frames):
        stay[:] = dp
        advance[0] = neg_inf
        advance[1:] = dp[:-1]
        skip[:] = neg_inf
        skip[3::2] = dp[1:-2:2]  # into even states, from the previous label state
        cand = np.stack([stay, advance, skip])
        choice = np.argmax(cand, axis=0)  # first max wins: stay > advance > skip
        best = cand[choice, np.arange(n_states)]
        reachable = best > neg_inf
        dp = np.where(reachable, best + emit[:, t], neg_inf)
        back[t, reachable] = choice[reachable]

    end_states = topo.end_states  # label state first: preferred on ties
    final = int(end_states[0] if dp[end_states[0] - 1] >= dp[end_states[1] - 1] else end_states[1])
    score = float(dp[final - 1])
    if not math.isfinite(score):
        raise InfeasibleLength("no valid path reaches an end state")

    states = [0] * t_frames
    states[-1] = final
    for t in range(t_frames - 1, 0, -1):
        states[t - 1] = states[t] - int(back[t, states[t] - 1])

    return _finish_path(states, score, labels, topo)


def _finish_path(
    states: list[int], score: float, labels: LabelSequence, topo: Topology
) -> AlignmentPath:
    frame_labels = [
        labels.tokens[topo.label_index(r) - 1] if topo.is_label_state(r) else BLANK_TOKEN
        for r in states
    ]
    segments: list[tuple[str, int, int]] = []
    run_start = 0
    for t in range(1, len(states) + 1):
        if t == len(states) or states[t] != states[run_start]:
            r = states[run_start]
            if topo.is_label_state(r):
                segments.append((labels.tokens[topo.label_index(r) - 1], run_start + 1, t))
            run_start = t
    return AlignmentPath(
        states=states, frame_labels=frame_labels, score=score, label_segments=segments
    )


def path_to_words(
    path: AlignmentPath,
    labels: LabelSequence,
    frame_shift_ms: int,
    marker: str = DEFAULT_CONTINUATION_MARKER,
) -> list[tuple[str, float, float]]:
    """Groups the path's label segments into word segments with ms boundaries.

    Consecutive tokens are joined while the word-continuation flag holds;
    a word spans from the first frame of its first token to the last frame
    of its last token, blank frames excluded. Frame t (1-indexed) covers
    [(t-1)*shift, t*shift) ms.
    """
    if len(path.label_segments) != len(labels):
        raise ShapeError(
            f"{len(path.label_segments)} path segments for {len(labels)} labels"
        )
    words: list[tuple[str, float, float]] = []
    text = ""
    start_frame = 0
    for (token, seg_start, seg_end), cont in zip(path.label_segments, labels.word_continuation):
        if not text:
            start_frame = seg_start
        text += token.removesuffix(marker) if cont else token
        if not cont:
            words.append((text, float((start_frame - 1) * frame_shift_ms), float(seg_end * frame_shift_ms)))
            text = ""
    path.word_segments = words
    return words


def validate_path(path: AlignmentPath, labels: LabelSequence, n_frames: int) -> None:
    """Asserts the structural path invariants; raises ShapeError on violation."""
    topo = Topology(len(labels))
    states = path.states
    if len(states) != n_frames:
        raise ShapeError("state count differs from frame count")
    if states[0] not in topo.start_states or states[-1] not in topo.end_states:
        raise ShapeError("path does not start/end in permitted states")
    for prev, cur in zip(states, states[1:]):
        delta = cur - prev
        if delta not in (0, 1, 2) or (delta == 2 and not topo.is_label_state(prev)):
            raise ShapeError(f"illegal transition {prev} -> {cur}")
    visited = [r for r in states if topo.is_label_state(r)]
    expected = [2 * k for k in range(1, len(labels) + 1)]
    if sorted(set(visited)) != expected:
        raise ShapeError("not every label state visited")
