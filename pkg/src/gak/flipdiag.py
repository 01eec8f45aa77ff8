"""Detection of time reversal and non-monotonicity in attention matrices.

Cross-attention (label x frame) is classified by the rank correlation of
its per-row argmax frames: a healthy alignment walks forward in time, a
reversed encoder walks backward. Self-attention (frame x frame) gets a
band-mass score contrasting the anti-diagonal against the main diagonal.
Both statistics are thresholded, exposed diagnostics -- the phenomenon is
visually obvious but needs a number to be testable.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ArgmaxAmbiguous, ShapeError, ValidationWarning


class Verdict(str, enum.Enum):
    FORWARD_MONOTONIC = "FORWARD_MONOTONIC"
    TIME_REVERSED = "TIME_REVERSED"
    NON_MONOTONIC = "NON_MONOTONIC"


@dataclass
class AttentionMatrix:
    """Cross (S x T, rows ~ sum to 1) or self (T x T) attention weights/energies."""

    values: np.ndarray
    kind: str = "cross"

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ShapeError(f"attention matrix must be rank 2, got {self.values.ndim}")
        if self.kind not in ("cross", "self"):
            raise ValueError(f"unknown attention kind {self.kind!r}")
        if self.kind == "cross":
            row_sums = self.values.sum(axis=1)
            if np.abs(row_sums - 1.0).max() > 1e-6:
                warnings.warn(
                    "cross-attention rows do not sum to 1; treating values as-is",
                    ValidationWarning,
                    stacklevel=2,
                )
            if (self.values < 0).any():
                warnings.warn(
                    "attention weights contain negative values",
                    ValidationWarning,
                    stacklevel=2,
                )


@dataclass
class MonotonicityReport:
    argmax_frames: list[int]
    kendall_tau: float
    verdict: Verdict
    threshold: float

    def to_dict(self) -> dict:
        return {
            "argmax_frames": self.argmax_frames,
            "kendall_tau": self.kendall_tau,
            "verdict": self.verdict.value,
            "threshold": self.threshold,
        }


def kendall_tau_a(sequence: list[int] | np.ndarray) -> float:
    """Tau-a over all index pairs; tied values contribute zero."""
    seq = np.asarray(sequence)
    n = len(seq)
    if n < 2:
        raise ShapeError("need at least 2 values for a rank correlation")
    concordant = discordant = 0
    for i in range(n - 1):
        diff = seq[i + 1 :] - seq[i]
        concordant += int((diff > 0).sum())
        discordant += int((diff < 0).sum())
    return (concordant - discordant) / (n * (n - 1) / 2)


def monotonicity(att: AttentionMatrix, threshold: float = 0.8) -> MonotonicityReport:
    """Classifies a cross-attention matrix by argmax-frame rank correlation.

    tau >= threshold is FORWARD_MONOTONIC, tau <= -threshold TIME_REVERSED,
    anything in between NON_MONOTONIC. Rows of all-equal values trigger an
    ArgmaxAmbiguous warning; their first frame index is used.
    """
    values = att.values
    if values.shape[0] < 2:
        raise ShapeError("need at least 2 attention rows")
    flat_rows = np.all(values == values[:, :1], axis=1)
    if flat_rows.any():
        warnings.warn(
            f"{int(flat_rows.sum())} attention row(s) are constant; argmax arbitrary",
            ArgmaxAmbiguous,
            stacklevel=2,
        )
    argmax = values.argmax(axis=1)
    tau = kendall_tau_a(argmax)
    if tau >= threshold:
        verdict = Verdict.FORWARD_MONOTONIC
    elif tau <= -threshold:
        verdict = Verdict.TIME_REVERSED
    else:
        verdict = Verdict.NON_MONOTONIC
    return MonotonicityReport(
        argmax_frames=[int(a) for a in argmax],
        kendall_tau=float(tau),
        verdict=verdict,
        threshold=threshold,
    )


def reversal_score(
    att: AttentionMatrix, band_frac: float = 0.05, energies: bool = False
) -> float:
    """Anti-diagonal vs main-diagonal band mass of a self-attention matrix.

    With band half-width b = max(1, ceil(band_frac * T)), the score is
    (A - M) / (A + M) where A is the mass within b of the anti-diagonal,
    M the mass within b of the main diagonal, and cells inside both bands
    (the center overlap, where the diagonals cross) are excluded from both
    so they cancel rather than bias the score. +1 means all band mass is
    anti-diagonal (time reversal), -1 all main-diagonal; 0 when neither
    band dominates or both bands are empty. Scale-invariant: mass is
    normalized internally. With ``energies`` the rows pass through a
    softmax first (pre-softmax inputs).
    """
    values = att.values
    t = values.shape[0]
    if values.shape[0] != values.shape[1]:
        raise ShapeError(f"self-attention matrix must be square, got {values.shape}")
    if t < 2:
        raise ShapeError("need at least 2 frames")
    if energies:
        shifted = values - values.max(axis=1, keepdims=True)
        weights = np.exp(shifted)
        weights /= weights.sum(axis=1, keepdims=True)
    else:
        weights = np.abs(values)
        total = weights.sum()
        if total <= 0:
            return 0.0
        weights = weights / total

    b = max(1, int(np.ceil(band_frac * t)))
    i = np.arange(1, t + 1)[:, None]
    j = np.arange(1, t + 1)[None, :]
    main_band = np.abs(i - j) <= b
    anti_band = np.abs(i + j - (t + 1)) <= b
    overlap = main_band & anti_band
    anti_mass = float(weights[anti_band & ~overlap].sum())
    main_mass = float(weights[main_band & ~overlap].sum())
    if anti_mass + main_mass == 0.0:
        return 0.0
    return (anti_mass - main_mass) / (anti_mass + main_mass)


# --- heatmap rendering ---

_VIRIDIS_ANCHORS = (
    (0.267, 0.005, 0.329),
    (0.283, 0.141, 0.458),
    (0.254, 0.265, 0.530),
    (0.207, 0.372, 0.553),
    (0.164, 0.471, 0.558),
    (0.128, 0.567, 0.551),
    (0.135, 0.659, 0.518),
    (0.267, 0.749, 0.441),
    (0.478, 0.821, 0.318),
    (0.741, 0.873, 0.150),
    (0.993, 0.906, 0.144),
)


def _ramp_color(x: float, color: str) -> str:
    x = min(1.0, max(0.0, x))
    if color == "grayscale":
        v = round(255 * x)
        return f"#{v:02x}{v:02x}{v:02x}"
    pos = x * (len(_VIRIDIS_ANCHORS) - 1)
    lo = int(pos)
    hi = min(lo + 1, len(_VIRIDIS_ANCHORS) - 1)
    frac = pos - lo
    rgb = [
        round(255 * ((1 - frac) * _VIRIDIS_ANCHORS[lo][c] + frac * _VIRIDIS_ANCHORS[hi][c]))
        for c in range(3)
    ]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def render_heatmap(
    matrix: np.ndarray,
    path: str,
    color: str = "viridis-like",
    cell_px: int = 12,
    clip_percentile: float = 0.0,
) -> None:
    """Writes an SVG heatmap: one rect per cell, row 1 at the top.

    Values are floor-clipped at the given percentile (useful for matrices
    with large-negative sentinel floors), then mapped linearly onto the
    color ramp over [min, max].
    """
    from .errors import IoError

    values = np.asarray(matrix, dtype=np.float64)
    if values.ndim != 2:
        raise ShapeError(f"heatmap needs a rank-2 matrix, got rank {values.ndim}")
    if clip_percentile > 0.0:
        lo = np.percentile(values, clip_percentile)
        values = np.maximum(values, lo)
    vmin, vmax = float(values.min()), float(values.max())
    span = vmax - vmin
    rows, cols = values.shape
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{cols * cell_px}" '
        f'height="{rows * cell_px}" shape-rendering="crispEdges">'
    ]
    for r in range(rows):
        for c in range(cols):
            x = (values[r, c] - vmin) / span if span > 0 else 0.5
            parts.append(
                f'<rect x="{c * cell_px}" y="{r * cell_px}" width="{cell_px}" '
                f'height="{cell_px}" fill="{_ramp_color(x, color)}"/>'
            )
    parts.append("</svg>")
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(parts))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
