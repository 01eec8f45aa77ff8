"""Reduce per-label, per-frame gradient vectors to a scalar saliency matrix.

The reduction is the log of the L2 norm over the feature axis: entry (s, t)
summarizes how strongly label s depends on input frame t. Zero-norm entries
get a large-negative floor so that a later softmax over time assigns them
effectively zero probability without producing NaN.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteInput

DEFAULT_FLOOR = -1e9

# Frame shifts produced by the usual feature pipelines: 10 ms raw input,
# 60 ms after 6x downsampling. Other values need an explicit opt-in.
STANDARD_SHIFTS_MS = (10, 60)


@dataclass
class GradientTensor:
    """S x T x D per-label input gradients at a stated frame shift.

    Row s holds the gradient of label s's log-probability w.r.t. every
    input frame; the final row is the EOS label.
    """

    values: np.ndarray
    frame_shift_ms: int
    layer_tag: str = "enc_in"

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 3:
            raise ValueError(f"gradient tensor must be rank 3, got {self.values.ndim}")
        if min(self.values.shape) < 1:
            raise ValueError(f"empty dimension in shape {self.values.shape}")
        if self.frame_shift_ms <= 0:
            raise ValueError("frame_shift_ms must be positive")


@dataclass
class SaliencyMatrix:
    """S x T log-L2-norm scores; entries are finite or equal to floor_value."""

    values: np.ndarray
    frame_shift_ms: int
    floor_value: float = DEFAULT_FLOOR


def reduce_gradients(grads: GradientTensor, floor: float = DEFAULT_FLOOR) -> SaliencyMatrix:
    """Collapses the feature axis of a gradient tensor to log L2 norms.

    out[s, t] = ln ||grads[s, t, :]||_2 where the norm is positive, else
    ``floor``. The floor must sit far below any realistic log-norm.

    Raises:
        NonFiniteInput: a gradient entry is NaN or Inf; the message names
            the first offending (s, t, d) location.
    """
    if floor >= -100:
        raise ValueError(f"floor {floor} too high; must be < -100")
    g = grads.values
    bad = ~np.isfinite(g)
    if bad.any():
        s, t, d = (int(i) for i in np.argwhere(bad)[0])
        raise NonFiniteInput(f"non-finite gradient at (s={s}, t={t}, d={d})")
    norms = np.linalg.norm(g, axis=2)
    out = np.full(norms.shape, floor, dtype=np.float64)
    positive = norms > 0.0
    out[positive] = np.log(norms[positive])
    return SaliencyMatrix(values=out, frame_shift_ms=grads.frame_shift_ms, floor_value=floor)
