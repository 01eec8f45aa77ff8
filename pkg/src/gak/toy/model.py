"""Hand-differentiated toy encoder-decoder.

Encoder: input projection plus sinusoidal position features, one
scaled-dot self-attention layer with a residual connection and a tanh
nonlinearity. The decoder is teacher-forced and feed-forward: each step
embeds the previous gold label and its step position, scores every
encoder frame with an additive MLP attention, and reads the attended
context out into a log-softmax over the vocabulary.

All backward passes are written out by hand in float64; correctness is
guarded by central finite differences (see gradcheck). Per-label input
gradients run one backward per label position with only that label's
log-probability as the objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import NumericalError, ShapeError
from .config import BOS_ID, ToyConfig
from .data import ToyBatch

PARAM_NAMES = (
    "w_in", "w_pos", "b_in",
    "w_q", "w_k", "w_v",
    "emb", "step_emb", "w_dq", "b_dq",
    "w_att_h", "w_att_q", "b_att", "v_att",
    "w_ctx", "w_qry", "b_read", "w_out", "b_out",
)


def position_features(n_frames: int, dim: int) -> np.ndarray:
    """Fixed sinusoidal absolute-position features, T x dim."""
    pos = np.arange(n_frames, dtype=np.float64)[:, None]
    k = np.arange(dim, dtype=np.float64)[None, :]
    angle = pos / np.power(200.0, (2.0 * (k // 2)) / dim)
    feats = np.where(k % 2 == 0, np.sin(angle), np.cos(angle))
    return feats


def init_params(cfg: ToyConfig) -> dict[str, np.ndarray]:
    """Seeded float64 initialization; scales chosen for plain-GD trainability."""
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x11]))
    d_in, dm, v, s = cfg.d_in, cfg.d_model, cfg.vocab, cfg.n_labels
    sc = cfg.init_scale

    def mat(rows: int, cols: int) -> np.ndarray:
        return rng.normal(0.0, sc / math.sqrt(rows), size=(rows, cols))

    return {
        "w_in": mat(d_in, dm),
        "w_pos": mat(dm, dm),
        "b_in": np.zeros(dm),
        "w_q": mat(dm, dm),
        "w_k": mat(dm, dm),
        "w_v": mat(dm, dm),
        "emb": rng.normal(0.0, 0.5 * sc, size=(v, dm)),
        "step_emb": rng.normal(0.0, 0.5 * sc, size=(s, dm)),
        "w_dq": mat(dm, dm),
        "b_dq": np.zeros(dm),
        "w_att_h": mat(dm, dm),
        "w_att_q": mat(dm, dm),
        "b_att": np.zeros(dm),
        "v_att": rng.normal(0.0, sc / math.sqrt(dm), size=dm),
        "w_ctx": mat(dm, dm),
        "w_qry": mat(dm, dm),
        "b_read": np.zeros(dm),
        "w_out": mat(dm, v),
        "b_out": np.zeros(v),
    }


def center_frame(n_frames: int) -> int:
    """0-indexed center frame: ceil(T/2) in 1-indexed terms."""
    return (n_frames + 1) // 2 - 1


@dataclass
class ForwardCache:
    """Intermediates needed by the hand-written backward pass."""

    x: np.ndarray
    pos: np.ndarray
    p: np.ndarray
    q_att: np.ndarray | None
    k_att: np.ndarray | None
    a_self: np.ndarray
    v_self: np.ndarray
    h_enc: np.ndarray
    h: np.ndarray  # encoder output as the decoder sees it (flipped if reversed)
    prev_ids: np.ndarray
    emb_prev: np.ndarray
    q_pre: np.ndarray
    q: np.ndarray
    m_pre: np.ndarray | None
    m: np.ndarray | None
    alpha: np.ndarray
    ctx: np.ndarray
    u_pre: np.ndarray
    u: np.ndarray
    logits: np.ndarray
    log_probs: np.ndarray
    probs: np.ndarray
    targets: np.ndarray


def forward(
    params: dict[str, np.ndarray], batch: ToyBatch, cfg: ToyConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray, ForwardCache]:
    """Teacher-forced pass.

    Returns (log_probs S x V, cross_attention S x T, self_attention T x T,
    cache). Cross-attention and decoder output rows are normalized to sum
    to one up to float64 roundoff.
    """
    x = batch.features
    t_frames, d_in = x.shape
    if d_in != cfg.d_in or t_frames != cfg.n_frames:
        raise ShapeError(f"batch features {x.shape} do not match config")
    if len(batch.label_ids) != cfg.n_labels:
        raise ShapeError("batch label count does not match config")
    dm = cfg.d_model

    pos = position_features(t_frames, dm)
    p = x @ params["w_in"] + pos @ params["w_pos"] + params["b_in"]

    if cfg.encoder_mode == "identity_self_attention":
        q_att = k_att = None
        a_self = np.eye(t_frames)
        v_self = p @ params["w_v"]
        z = v_self
    else:
        q_att = p @ params["w_q"]
        k_att = p @ params["w_k"]
        energy = q_att @ k_att.T / math.sqrt(dm)
        energy -= energy.max(axis=1, keepdims=True)
        a_self = np.exp(energy)
        a_self /= a_self.sum(axis=1, keepdims=True)
        v_self = p @ params["w_v"]
        z = a_self @ v_self
    h_enc = np.tanh(p + z)
    h = h_enc[::-1].copy() if cfg.encoder_mode == "reversed" else h_enc

    targets = np.asarray(batch.label_ids)
    prev_ids = np.concatenate(([BOS_ID], targets[:-1]))
    emb_prev = params["emb"][prev_ids]
    q_pre = emb_prev @ params["w_dq"] + params["step_emb"] + params["b_dq"]
    q = np.tanh(q_pre)

    if cfg.cross_attention_mode == "hard_center":
        m_pre = m = None
        alpha = np.zeros((cfg.n_labels, t_frames))
        alpha[:, center_frame(t_frames)] = 1.0
    else:
        m_pre = h @ params["w_att_h"] + (q @ params["w_att_q"])[:, None, :] + params["b_att"]
        m = np.tanh(m_pre)
        e = m @ params["v_att"]
        e -= e.max(axis=1, keepdims=True)
        alpha = np.exp(e)
        alpha /= alpha.sum(axis=1, keepdims=True)

    ctx = alpha @ h
    u_pre = ctx @ params["w_ctx"] + q @ params["w_qry"] + params["b_read"]
    u = np.tanh(u_pre)
    logits = u @ params["w_out"] + params["b_out"]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    probs = np.exp(log_probs)

    cache = ForwardCache(
        x=x, pos=pos, p=p, q_att=q_att, k_att=k_att, a_self=a_self, v_self=v_self,
        h_enc=h_enc, h=h, prev_ids=prev_ids, emb_prev=emb_prev, q_pre=q_pre, q=q,
        m_pre=m_pre, m=m, alpha=alpha, ctx=ctx, u_pre=u_pre, u=u,
        logits=logits, log_probs=log_probs, probs=probs, targets=targets,
    )
    return log_probs, alpha, a_self, cache


def zero_grads(params: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(value) for name, value in params.items()}


def _backward(
    params: dict[str, np.ndarray],
    cache: ForwardCache,
    d_logits: np.ndarray,
    cfg: ToyConfig,
) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Backpropagates d(objective)/d(logits) to all parameters and the input."""
    g = zero_grads(params)
    dm = cfg.d_model

    g["w_out"] = cache.u.T @ d_logits
    g["b_out"] = d_logits.sum(axis=0)
    d_u = d_logits @ params["w_out"].T
    d_u_pre = d_u * (1.0 - cache.u**2)
    g["w_ctx"] = cache.ctx.T @ d_u_pre
    g["w_qry"] = cache.q.T @ d_u_pre
    g["b_read"] = d_u_pre.sum(axis=0)
    d_ctx = d_u_pre @ params["w_ctx"].T
    d_q = d_u_pre @ params["w_qry"].T

    d_alpha = d_ctx @ cache.h.T
    d_h = cache.alpha.T @ d_ctx
    if cfg.cross_attention_mode != "hard_center":
        alpha = cache.alpha
        d_e = alpha * (d_alpha - (alpha * d_alpha).sum(axis=1, keepdims=True))
        g["v_att"] = (cache.m * d_e[:, :, None]).sum(axis=(0, 1))
        d_m = d_e[:, :, None] * params["v_att"]
        d_m_pre = d_m * (1.0 - cache.m**2)
        d_h_rows = d_m_pre.sum(axis=0)  # T x dm'
        g["w_att_h"] = cache.h.T @ d_h_rows
        d_h += d_h_rows @ params["w_att_h"].T
        d_q_rows = d_m_pre.sum(axis=1)  # S x dm'
        g["w_att_q"] = cache.q.T @ d_q_rows
        d_q += d_q_rows @ params["w_att_q"].T
        g["b_att"] = d_m_pre.sum(axis=(0, 1))

    d_q_pre = d_q * (1.0 - cache.q**2)
    g["w_dq"] = cache.emb_prev.T @ d_q_pre
    g["b_dq"] = d_q_pre.sum(axis=0)
    g["step_emb"] = d_q_pre.copy()
    np.add.at(g["emb"], cache.prev_ids, d_q_pre @ params["w_dq"].T)

    d_h_enc = d_h[::-1] if cfg.encoder_mode == "reversed" else d_h
    d_r = d_h_enc * (1.0 - cache.h_enc**2)
    d_p = d_r.copy()
    d_z = d_r
    if cfg.encoder_mode == "identity_self_attention":
        d_v_self = d_z
    else:
        d_a = d_z @ cache.v_self.T
        d_v_self = cache.a_self.T @ d_z
        a = cache.a_self
        d_energy = a * (d_a - (a * d_a).sum(axis=1, keepdims=True))
        d_energy /= math.sqrt(dm)
        d_q_att = d_energy @ cache.k_att
        d_k_att = d_energy.T @ cache.q_att
        g["w_q"] = cache.p.T @ d_q_att
        g["w_k"] = cache.p.T @ d_k_att
        d_p += d_q_att @ params["w_q"].T + d_k_att @ params["w_k"].T
    g["w_v"] = cache.p.T @ d_v_self
    d_p += d_v_self @ params["w_v"].T

    g["w_in"] = cache.x.T @ d_p
    g["w_pos"] = cache.pos.T @ d_p
    g["b_in"] = d_p.sum(axis=0)
    d_x = d_p @ params["w_in"].T
    return g, d_x


def loss_and_gradients(
    params: dict[str, np.ndarray],
    batch: ToyBatch,
    cfg: ToyConfig,
    input_grads: bool = True,
) -> tuple[float, dict[str, np.ndarray], np.ndarray | None]:
    """Mean label cross-entropy, its parameter gradients, and per-label input gradients.

    The input-gradient tensor row s is d log p(label_s | ...) / d x -- each
    label's objective backpropagated on its own, S separate passes. Pass
    ``input_grads=False`` to skip them (training only needs the loss grads).

    Raises:
        NumericalError: the loss is NaN or Inf.
    """
    log_probs, _, _, cache = forward(params, batch, cfg)
    s_count = cfg.n_labels
    rows = np.arange(s_count)
    gold = cache.targets
    loss = -float(log_probs[rows, gold].mean())
    if not math.isfinite(loss):
        raise NumericalError(f"non-finite loss {loss}")

    one_hot = np.zeros_like(cache.probs)
    one_hot[rows, gold] = 1.0
    d_logits_loss = -(one_hot - cache.probs) / s_count
    param_grads, _ = _backward(params, cache, d_logits_loss, cfg)

    grad_tensor = None
    if input_grads:
        grad_tensor = np.zeros((s_count, cfg.n_frames, cfg.d_in))
        for s in range(s_count):
            d_logits = np.zeros_like(cache.probs)
            d_logits[s] = one_hot[s] - cache.probs[s]
            _, d_x = _backward(params, cache, d_logits, cfg)
            grad_tensor[s] = d_x
    return loss, param_grads, grad_tensor
