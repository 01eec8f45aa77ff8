#!/usr/bin/env python3
"""Train the toy model, run the full alignment pipeline, print a TSE report.

Usage: python scripts/run_pipeline_demo.py [--seed 0] [--mode standard]
"""

import argparse
import tempfile
from pathlib import Path

from gak.arrayio import load_array
from gak.gradalign import (
    ScoreMatrix,
    default_blank_score,
    path_to_words,
    time_log_softmax,
    viterbi_align,
)
from gak.labels import parse_label_file
from gak.saliency import DEFAULT_FLOOR, GradientTensor, reduce_gradients
from gak.toy import ToyConfig, export_artifacts, train
from gak.tse import WordAlignment, compute_tse, parse_alignment


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--mode", default="standard",
                    choices=["standard", "reversed", "identity_self_attention"])
    ap.add_argument("--steps", type=int, default=1200)
    ap.add_argument("--out-dir", default=None)
    args = ap.parse_args()

    cfg = ToyConfig(seed=args.seed, encoder_mode=args.mode, steps=args.steps)
    out_dir = Path(args.out_dir) if args.out_dir else Path(tempfile.mkdtemp(prefix="gak_demo_"))

    print(f"training {cfg.steps} steps (mode={cfg.encoder_mode}, seed={cfg.seed}) ...")
    result = train(cfg, log_every=max(1, cfg.steps // 5))
    export_artifacts(result.params, result.eval_batch, cfg, out_dir)
    print(f"artifacts in {out_dir}")

    grads = GradientTensor(load_array(out_dir / "input_grads.npy"), cfg.frame_shift_ms)
    sal = reduce_gradients(grads, floor=DEFAULT_FLOOR)
    labels = parse_label_file(out_dir / "labels.txt")
    scores = time_log_softmax(
        ScoreMatrix(sal.values[:-1], sal.frame_shift_ms), floor_value=sal.floor_value
    )
    path = viterbi_align(scores, labels, default_blank_score(cfg.frame_shift_ms))
    words = path_to_words(path, labels, cfg.frame_shift_ms)

    ref = parse_alignment(out_dir / "ref_words.tsv")
    report = compute_tse(WordAlignment(words), ref)
    print("\nword        hypothesis           reference")
    for (w, hs, he), (_, rs, re) in zip(words, ref.entries):
        print(f"{w:10s}  [{hs:6.0f}, {he:6.0f}] ms   [{rs:6.0f}, {re:6.0f}] ms")
    print(f"\nboundary TSE {report.boundary_tse_ms:.1f} ms, "
          f"center TSE {report.center_tse_ms:.1f} ms over {report.n_words} words "
          f"(path score {path.score:.3f})")


if __name__ == "__main__":
    main()
