"""Central finite-difference verification of the hand-written backward pass."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidEpsilon
from .config import ToyConfig
from .data import ToyBatch
from .model import forward, loss_and_gradients


@dataclass
class GradCheckReport:
    max_rel_error: float
    mean_rel_error: float
    n_coordinates: int
    tol: float
    worst_coordinate: str

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tol

    def to_dict(self) -> dict:
        return {
            "max_rel_error": self.max_rel_error,
            "mean_rel_error": self.mean_rel_error,
            "n_coordinates": self.n_coordinates,
            "tol": self.tol,
            "worst_coordinate": self.worst_coordinate,
            "passed": self.passed,
        }


def _loss_only(params: dict[str, np.ndarray], batch: ToyBatch, cfg: ToyConfig) -> float:
    log_probs, _, _, cache = forward(params, batch, cfg)
    rows = np.arange(cfg.n_labels)
    return -float(log_probs[rows, cache.targets].mean())


def _label_logprob(
    params: dict[str, np.ndarray], batch: ToyBatch, cfg: ToyConfig, s: int
) -> float:
    log_probs, _, _, cache = forward(params, batch, cfg)
    return float(log_probs[s, cache.targets[s]])


def finite_diff_check(
    params: dict[str, np.ndarray],
    batch: ToyBatch,
    cfg: ToyConfig,
    eps: float = 1e-5,
    tol: float = 1e-4,
    n_samples: int = 200,
    rng_seed: int = 0,
    denom_floor: float = 1e-6,
) -> GradCheckReport:
    """Compares analytic gradients against (f(x+eps) - f(x-eps)) / (2 eps).

    Samples at least ``n_samples`` coordinates across all parameter arrays
    (plus a handful of per-label input-gradient coordinates) and reports
    relative errors with denominator max(|analytic|, |fd|, denom_floor).
    The floor must sit above the f64 central-difference noise
    (~1e-16 * |loss| / eps absolute): near-zero gradients would otherwise
    read pure FD quantization noise as error.

    Raises:
        InvalidEpsilon: eps <= 0.
    """
    if eps <= 0:
        raise InvalidEpsilon(f"eps must be positive, got {eps}")
    rng = np.random.default_rng(rng_seed)
    loss, grads, grad_tensor = loss_and_gradients(params, batch, cfg, input_grads=True)
    del loss

    errors: list[tuple[float, str]] = []

    names = sorted(params)
    sizes = np.array([params[n].size for n in names], dtype=np.float64)
    picks = rng.choice(len(names), size=n_samples, p=sizes / sizes.sum())
    for idx in picks:
        name = names[idx]
        flat_i = int(rng.integers(params[name].size))
        theta = params[name].reshape(-1)
        keep = theta[flat_i]
        theta[flat_i] = keep + eps
        up = _loss_only(params, batch, cfg)
        theta[flat_i] = keep - eps
        down = _loss_only(params, batch, cfg)
        theta[flat_i] = keep
        fd = (up - down) / (2.0 * eps)
        an = float(grads[name].reshape(-1)[flat_i])
        rel = abs(an - fd) / max(abs(an), abs(fd), denom_floor)
        errors.append((rel, f"{name}[{flat_i}]"))

    # A few input-gradient coordinates per label: FD of that label's log-prob.
    x = batch.features
    for s in range(cfg.n_labels):
        for _ in range(2):
            flat_i = int(rng.integers(x.size))
            keep = x.reshape(-1)[flat_i]
            x.reshape(-1)[flat_i] = keep + eps
            up = _label_logprob(params, batch, cfg, s)
            x.reshape(-1)[flat_i] = keep - eps
            down = _label_logprob(params, batch, cfg, s)
            x.reshape(-1)[flat_i] = keep
            fd = (up - down) / (2.0 * eps)
            an = float(grad_tensor[s].reshape(-1)[flat_i])
            rel = abs(an - fd) / max(abs(an), abs(fd), denom_floor)
            errors.append((rel, f"input_grads[{s}][{flat_i}]"))

    rels = np.array([r for r, _ in errors])
    worst = max(errors, key=lambda pair: pair[0])
    return GradCheckReport(
        max_rel_error=float(rels.max()),
        mean_rel_error=float(rels.mean()),
        n_coordinates=len(errors),
        tol=tol,
        worst_coordinate=worst[1],
    )
