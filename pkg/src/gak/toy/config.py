"""Configuration for the desk-scale differentiable encoder-decoder."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

ENCODER_MODES = ("standard", "reversed", "identity_self_attention")
CROSS_MODES = ("learned_mlp", "hard_center")

BOS_ID = 0
EOS_ID = 1
FIRST_REAL_ID = 2


@dataclass
class ToyConfig:
    """Model and data dimensions plus training hyperparameters.

    ``encoder_mode`` "reversed" flips the encoder output along time after
    the self-attention stack; "identity_self_attention" pins the
    self-attention weights to the identity matrix. ``cross_attention_mode``
    "hard_center" forces every cross-attention row to a one-hot on the
    center frame.
    """

    n_frames: int = 24
    n_labels: int = 6  # includes the final EOS position
    vocab: int = 12  # ids: 0 = BOS, 1 = EOS, 2.. = real labels
    d_in: int = 8
    d_model: int = 24
    encoder_mode: str = "standard"
    cross_attention_mode: str = "learned_mlp"
    seed: int = 0
    learning_rate: float = 0.3
    steps: int = 1200
    batch_size: int = 8  # utterances averaged per gradient step
    noise_scale: float = 0.0
    frame_shift_ms: int = 10
    init_scale: float = field(default=1.0)

    def __post_init__(self) -> None:
        if not (2 <= self.n_labels <= 20):
            raise ValueError(f"n_labels {self.n_labels} outside [2, 20]")
        if not (1 <= self.n_frames <= 200):
            raise ValueError(f"n_frames {self.n_frames} outside [1, 200]")
        if not (4 <= self.vocab <= 64):
            raise ValueError(f"vocab {self.vocab} outside [4, 64]")
        if not (1 <= self.d_in <= 32 and 1 <= self.d_model <= 32):
            raise ValueError("feature dims outside [1, 32]")
        if self.encoder_mode not in ENCODER_MODES:
            raise ValueError(f"encoder_mode {self.encoder_mode!r} not in {ENCODER_MODES}")
        if self.cross_attention_mode not in CROSS_MODES:
            raise ValueError(
                f"cross_attention_mode {self.cross_attention_mode!r} not in {CROSS_MODES}"
            )

    @property
    def n_real_labels(self) -> int:
        return self.n_labels - 1

    def to_dict(self) -> dict:
        return asdict(self)
