"""Desk-scale differentiable encoder-decoder with hand-derived gradients."""

from .config import BOS_ID, EOS_ID, FIRST_REAL_ID, ToyConfig
from .data import ToyBatch, gen_synthetic, prototypes, segment_layout, token_for
from .export import export_artifacts
from .gradcheck import GradCheckReport, finite_diff_check
from .model import forward, init_params, loss_and_gradients, position_features
from .train import TrainResult, train

__all__ = [
    "BOS_ID",
    "EOS_ID",
    "FIRST_REAL_ID",
    "GradCheckReport",
    "ToyBatch",
    "ToyConfig",
    "TrainResult",
    "export_artifacts",
    "finite_diff_check",
    "forward",
    "gen_synthetic",
    "init_params",
    "loss_and_gradients",
    "position_features",
    "prototypes",
    "segment_layout",
    "token_for",
    "train",
]
