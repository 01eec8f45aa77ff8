"""Dump model artifacts in the toolkit file formats for the full pipeline."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..arrayio import store_array
from ..errors import IoError
from .config import ToyConfig
from .data import ToyBatch
from .model import forward, loss_and_gradients

ARTIFACT_NAMES = {
    "gradients": "input_grads.npy",
    "cross_attention": "cross_attention.npy",
    "self_attention": "self_attention.npy",
    "labels": "labels.txt",
    "reference": "ref_words.tsv",
    "manifest": "manifest.json",
}


def export_artifacts(
    params: dict[str, np.ndarray],
    batch: ToyBatch,
    cfg: ToyConfig,
    out_dir: str | Path,
) -> dict:
    """Writes gradients, attentions, labels, and the reference alignment.

    Produces the per-label input-gradient tensor (S x T x D_in), the
    cross- and self-attention matrices, one label token per line (EOS
    excluded), the ground-truth word alignment TSV, and a manifest with
    shapes and the frame shift. Returns the manifest dict.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out}: {exc}") from exc

    _, cross_att, self_att, _ = forward(params, batch, cfg)
    _, _, grad_tensor = loss_and_gradients(params, batch, cfg, input_grads=True)

    store_array(grad_tensor, out / ARTIFACT_NAMES["gradients"])
    store_array(cross_att, out / ARTIFACT_NAMES["cross_attention"])
    store_array(self_att, out / ARTIFACT_NAMES["self_attention"])
    (out / ARTIFACT_NAMES["labels"]).write_text("".join(t + "\n" for t in batch.tokens))
    ref_lines = [
        f"{word}\t{start:g}\t{end:g}"
        for word, start, end in batch.reference_words(cfg.frame_shift_ms)
    ]
    (out / ARTIFACT_NAMES["reference"]).write_text("".join(line + "\n" for line in ref_lines))

    manifest = {
        "schema": 1,
        "frame_shift_ms": cfg.frame_shift_ms,
        "layer_tag": "enc_in",
        "shape": list(grad_tensor.shape),
        "encoder_mode": cfg.encoder_mode,
        "cross_attention_mode": cfg.cross_attention_mode,
        "seed": cfg.seed,
        "files": dict(ARTIFACT_NAMES),
        "tokens": list(batch.tokens),
    }
    (out / ARTIFACT_NAMES["manifest"]).write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest
