#!/usr/bin/env python3
"""Standard vs reversed encoder: attention diagnostics and heatmaps side by side.

Usage: python scripts/flip_demo.py [--seed 0] [--out-dir heatmaps]
"""

import argparse
from pathlib import Path

from gak.flipdiag import AttentionMatrix, monotonicity, render_heatmap, reversal_score
from gak.toy import ToyConfig, forward, train


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--steps", type=int, default=1200)
    ap.add_argument("--out-dir", default="heatmaps")
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for mode in ("standard", "reversed"):
        cfg = ToyConfig(seed=args.seed, encoder_mode=mode, steps=args.steps)
        result = train(cfg)
        _, cross, self_att, _ = forward(result.params, result.eval_batch, cfg)
        report = monotonicity(AttentionMatrix(cross[:-1], "cross"))
        self_score = reversal_score(AttentionMatrix(self_att, "self"))
        print(
            f"{mode:9s}: tau {report.kendall_tau:+.2f} -> {report.verdict.value:18s}"
            f" argmax {report.argmax_frames}  self-attention reversal score {self_score:+.2f}"
        )
        render_heatmap(cross, out / f"cross_{mode}.svg", color="viridis-like")
        render_heatmap(self_att, out / f"self_{mode}.svg", color="grayscale")
    print(f"heatmaps written to {out}/")


if __name__ == "__main__":
    main()
