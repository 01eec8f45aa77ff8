"""Plain gradient-descent training on freshly sampled synthetic utterances.

Each step draws a new utterance from the generator (same prototypes and
segment layout, fresh label identities), so the decoder cannot memorize
the label sequence and must read the encoder. Single-threaded and
deterministic: the same config reproduces the identical trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ToyConfig
from .data import ToyBatch, gen_synthetic
from .model import init_params, loss_and_gradients

_STEP_STREAM = 0x57E9


@dataclass
class TrainResult:
    params: dict[str, np.ndarray]
    losses: list[float]
    eval_batch: ToyBatch

    @property
    def final_loss(self) -> float:
        return self.losses[-1] if self.losses else float("nan")


def step_seed(step: int, item: int) -> int:
    # Offset keeps training draws distinct from the evaluation batch (seed 0
    # stream is reserved for it via gen_synthetic(cfg, cfg.seed)).
    return _STEP_STREAM + step * 1024 + item


def train(cfg: ToyConfig, log_every: int = 0) -> TrainResult:
    """Runs cfg.steps of gradient descent; returns params and loss history.

    Every step averages the loss gradient over ``cfg.batch_size`` fresh
    utterances. The evaluation batch is ``gen_synthetic(cfg, cfg.seed)``
    and is never trained on.
    """
    params = init_params(cfg)
    losses: list[float] = []
    for step in range(cfg.steps):
        step_loss = 0.0
        summed: dict[str, np.ndarray] | None = None
        for item in range(cfg.batch_size):
            batch = gen_synthetic(cfg, step_seed(step, item))
            loss, grads, _ = loss_and_gradients(params, batch, cfg, input_grads=False)
            step_loss += loss
            if summed is None:
                summed = grads
            else:
                for name, grad in grads.items():
                    summed[name] += grad
        for name, grad in summed.items():
            params[name] -= cfg.learning_rate * grad / cfg.batch_size
        losses.append(step_loss / cfg.batch_size)
        if log_every and (step + 1) % log_every == 0:
            recent = np.mean(losses[-log_every:])
            print(f"step {step + 1:5d}  loss {recent:.4f}")
    return TrainResult(params=params, losses=losses, eval_batch=gen_synthetic(cfg, cfg.seed))
