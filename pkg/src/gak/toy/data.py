"""Synthetic utterances with known label segments.

Every utterance follows the same frame layout, fixed by the config
dimensions: a few leading silence frames (more than the trailing ones, as
real corpora tend to start with silence), one contiguous segment per real
label, then trailing silence. Frames carry the prototype vector of their
label (or the silence prototype) plus optional isotropic noise, so at
noise 0 the segments are recoverable exactly by nearest-prototype search.
Label identities are drawn fresh per seed without adjacent repeats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InfeasibleLength
from .config import EOS_ID, FIRST_REAL_ID, ToyConfig

LEAD_SILENCE = 3
TRAIL_SILENCE = 2

_PROTO_STREAM = 0x70
_LABEL_STREAM = 0x1A
_NOISE_STREAM = 0x0E


@dataclass
class ToyBatch:
    """One utterance: features, gold labels (EOS last), true segments."""

    features: np.ndarray  # T x D_in
    label_ids: list[int]  # length S, ends with EOS_ID
    tokens: list[str]  # length S-1, real labels only
    segments: list[tuple[int, int]]  # per real label, 1-indexed inclusive frames

    @property
    def n_frames(self) -> int:
        return self.features.shape[0]

    def reference_words(self, frame_shift_ms: int) -> list[tuple[str, float, float]]:
        """Ground-truth word alignment under the frame-time convention."""
        return [
            (tok, float((start - 1) * frame_shift_ms), float(end * frame_shift_ms))
            for tok, (start, end) in zip(self.tokens, self.segments)
        ]


def token_for(vocab_id: int) -> str:
    return f"w{vocab_id:02d}"


def prototypes(cfg: ToyConfig) -> np.ndarray:
    """(vocab + 1) x D_in prototype vectors; the extra last row is silence.

    Derived from cfg.seed only, so every batch of a run shares them.
    """
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, _PROTO_STREAM]))
    return rng.normal(0.0, 1.0, size=(cfg.vocab + 1, cfg.d_in))


def segment_layout(cfg: ToyConfig) -> list[tuple[int, int]]:
    """Fixed per-config segment spans (1-indexed inclusive), silence excluded."""
    n_real = cfg.n_real_labels
    usable = cfg.n_frames - LEAD_SILENCE - TRAIL_SILENCE
    if usable < n_real:
        raise InfeasibleLength(f"{cfg.n_frames} frames cannot hold {n_real} segments")
    base, extra = divmod(usable, n_real)
    spans = []
    start = LEAD_SILENCE + 1
    for k in range(n_real):
        length = base + (1 if k < extra else 0)
        spans.append((start, start + length - 1))
        start += length
    return spans


def gen_synthetic(cfg: ToyConfig, seed: int) -> ToyBatch:
    """Deterministic utterance for (cfg, seed); see the module docstring."""
    if cfg.n_frames < 2 * cfg.n_labels + 4:
        raise InfeasibleLength(
            f"n_frames {cfg.n_frames} < {2 * cfg.n_labels + 4} needed for "
            f"{cfg.n_labels} labels plus silence"
        )
    protos = prototypes(cfg)
    spans = segment_layout(cfg)
    label_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, _LABEL_STREAM, seed]))
    n_real = cfg.n_real_labels
    ids: list[int] = []
    while len(ids) < n_real:
        cand = int(label_rng.integers(FIRST_REAL_ID, cfg.vocab))
        if ids and cand == ids[-1]:
            continue
        ids.append(cand)

    frame_label = np.full(cfg.n_frames, cfg.vocab)  # silence prototype row
    for (start, end), vid in zip(spans, ids):
        frame_label[start - 1 : end] = vid
    features = protos[frame_label].copy()
    if cfg.noise_scale > 0.0:
        noise_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, _NOISE_STREAM, seed]))
        features += cfg.noise_scale * noise_rng.normal(size=features.shape)

    return ToyBatch(
        features=features,
        label_ids=ids + [EOS_ID],
        tokens=[token_for(v) for v in ids],
        segments=spans,
    )
