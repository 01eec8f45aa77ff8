"""Baseline forced alignment from frame posteriors with the standard CTC topology.

Same blank-augmented state layout as :mod:`gak.gradalign`, but the
label-to-label skip is forbidden when the two labels are equal, and blank
frames score the posterior of the blank symbol (column 0) instead of a
fixed hyperparameter. Kept as an independent implementation on purpose:
the two aligners cross-check each other on instances where their
topologies agree.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleLength, ShapeError, ValidationWarning, VocabError
from .gradalign import AlignmentPath, Topology, _finish_path
from .labels import LabelSequence

BLANK_ID = 0


@dataclass
class PosteriorMatrix:
    """T x V per-frame label log-probabilities; column 0 is the blank."""

    values: np.ndarray
    frame_shift_ms: int

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ShapeError(f"posterior matrix must be rank 2, got {self.values.ndim}")
        row_lse = np.log(np.exp(self.values - self.values.max(axis=1, keepdims=True)).sum(axis=1))
        row_lse += self.values.max(axis=1)
        if np.abs(row_lse).max() > 1e-6:
            warnings.warn(
                f"posterior rows are not normalized (max |logsumexp| = {np.abs(row_lse).max():.3g})",
                ValidationWarning,
                stacklevel=2,
            )


def min_frames(labels: LabelSequence) -> int:
    """Shortest alignable frame count: one per label plus one blank per equal pair."""
    ids = _vocab_ids(labels)
    return len(ids) + sum(1 for a, b in zip(ids, ids[1:]) if a == b)


def _vocab_ids(labels: LabelSequence) -> list[int]:
    if labels.vocab_ids is None:
        raise VocabError("posterior alignment needs vocab ids for every label")
    return labels.vocab_ids


def ctc_viterbi_align(post: PosteriorMatrix, labels: LabelSequence) -> AlignmentPath:
    """Best-path CTC forced alignment of ``labels`` through ``post``.

    Uses the same tie-breaking (stay over advance over skip, final label
    state over final blank) and the same path contract as the score-matrix
    aligner, so results are directly comparable.

    Raises:
        InfeasibleLength: fewer frames than the topology needs.
        VocabError: a label id is missing or outside the posterior columns.
    """
    ids = _vocab_ids(labels)
    values = post.values
    t_frames, vocab = values.shape
    if max(ids) >= vocab or min(ids) < 0:
        raise VocabError(f"label id outside posterior vocabulary of size {vocab}")
    if t_frames < min_frames(labels):
        raise InfeasibleLength(f"T={t_frames} < minimum {min_frames(labels)} for these labels")

    topo = Topology(len(labels))
    n_states = topo.n_states
    neg_inf = -math.inf

    def emit(state: int, t: int) -> float:
        col = ids[topo.label_index(state) - 1] if topo.is_label_state(state) else BLANK_ID
        return float(values[t, col])

    # skip into state r (from r-2) is legal only between distinct labels
    skip_ok = [False] * (n_states + 1)
    for k in range(2, len(labels) + 1):
        skip_ok[2 * k] = ids[k - 1] != ids[k - 2]

    dp = [neg_inf] * (n_states + 1)
    back = [[-1] * (n_states + 1) for _ in range(t_frames)]
    for s in topo.start_states:
        dp[s] = emit(s, 0)
        back[0][s] = 0
    for t in range(1, t_frames):
        new = [neg_inf] * (n_states + 1)
        for r in range(1, n_states + 1):
            cands = [dp[r], dp[r - 1] if r >= 2 else neg_inf]
            if topo.is_label_state(r) and r >= 4 and skip_ok[r]:
                cands.append(dp[r - 2])
            best_delta = max(range(len(cands)), key=lambda i: (cands[i], -i))
            if cands[best_delta] > neg_inf:
                new[r] = cands[best_delta] + emit(r, t)
                back[t][r] = best_delta
        dp = new

    end_label, end_blank = topo.end_states
    final = end_label if dp[end_label] >= dp[end_blank] else end_blank
    score = dp[final]
    if not math.isfinite(score):
        raise InfeasibleLength("no valid CTC path reaches an end state")

    states = [0] * t_frames
    states[-1] = final
    for t in range(t_frames - 1, 0, -1):
        states[t - 1] = states[t] - back[t][states[t]]
    return _finish_path(states, float(score), labels, topo)
