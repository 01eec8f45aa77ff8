"""Brute-force reference implementations the fast code is checked against.

Everything here enumerates explicitly and scores paths by direct summation,
independent of the DP implementations under test.
"""

from __future__ import annotations

import numpy as np


def _extend(seq: list[int], n_states: int, skip_ok) -> list[list[int]]:
    state = seq[-1]
    succs = [state, state + 1]
    if state % 2 == 0 and state + 2 <= n_states and skip_ok(state):
        succs.append(state + 2)
    return [seq + [nxt] for nxt in succs if nxt <= n_states]


def enumerate_state_paths(n_labels: int, n_frames: int, ctc_ids=None) -> list[list[int]]:
    """All valid state sequences through the blank-augmented topology.

    With ``ctc_ids`` given, the label-to-label skip is forbidden between
    equal adjacent ids (standard CTC); otherwise the skip is always legal.
    """
    n_states = 2 * n_labels + 1

    if ctc_ids is None:
        skip_ok = lambda state: True
    else:
        def skip_ok(state):
            k = state // 2  # skip goes from label k to label k+1
            return ctc_ids[k] != ctc_ids[k - 1]

    frontier = [[1], [2]]
    for _ in range(n_frames - 1):
        frontier = [ext for seq in frontier for ext in _extend(seq, n_states, skip_ok)]
    paths = [seq for seq in frontier if seq[-1] in (2 * n_labels, 2 * n_labels + 1)]
    # sanity: the topology must force every label state to be visited
    for seq in paths:
        assert {s for s in seq if s % 2 == 0} == {2 * k for k in range(1, n_labels + 1)}
    return paths


def score_grad_path(states: list[int], scores: np.ndarray, blank_score: float) -> float:
    total = 0.0
    for t, state in enumerate(states):
        total += scores[state // 2 - 1, t] if state % 2 == 0 else blank_score
    return total


def score_ctc_path(states: list[int], post: np.ndarray, ids: list[int]) -> float:
    total = 0.0
    for t, state in enumerate(states):
        col = ids[state // 2 - 1] if state % 2 == 0 else 0
        total += post[t, col]
    return total


def best_grad_paths(scores: np.ndarray, blank_score: float):
    """(max score, list of argmax state paths) by exhaustive enumeration."""
    n_labels, n_frames = scores.shape
    paths = enumerate_state_paths(n_labels, n_frames)
    scored = [(score_grad_path(p, scores, blank_score), p) for p in paths]
    best = max(s for s, _ in scored)
    return best, [p for s, p in scored if s == best]


def best_ctc_paths(post: np.ndarray, ids: list[int]):
    n_frames = post.shape[0]
    paths = enumerate_state_paths(len(ids), n_frames, ctc_ids=ids)
    if not paths:
        return None, []
    scored = [(score_ctc_path(p, post, ids), p) for p in paths]
    best = max(s for s, _ in scored)
    return best, [p for s, p in scored if s == best]


def kendall_tau_pairs(seq) -> float:
    """Tau-a by literal pair counting."""
    n = len(seq)
    concordant = discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            if seq[j] > seq[i]:
                concordant += 1
            elif seq[j] < seq[i]:
                discordant += 1
    return (concordant - discordant) / (n * (n - 1) / 2)
