"""Command-line interface: one executable exposing every subcommand.

Exit codes: 0 success, 1 domain error (infeasible alignment, mismatched
inputs, ...), 2 usage error. All machine-readable reports are JSON with a
top-level ``"schema": 1`` field. Verbosity is controlled by the GAK_LOG
environment variable (DEBUG/INFO/WARNING/ERROR).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import toy
from .arrayio import load_array, store_array, validation_report
from .ctcalign import PosteriorMatrix, ctc_viterbi_align
from .errors import GakError, ShapeError
from .flipdiag import AttentionMatrix, monotonicity, render_heatmap, reversal_score
from .gradalign import (
    ScoreMatrix,
    default_blank_score,
    path_to_words,
    time_log_softmax,
    viterbi_align,
)
from .labels import parse_label_file
from .saliency import DEFAULT_FLOOR, STANDARD_SHIFTS_MS, GradientTensor, reduce_gradients
from .tse import compute_tse, merge_reports, parse_alignment

SCHEMA_VERSION = 1

log = logging.getLogger("gak")


class _UsageError(Exception):
    """Missing or inconsistent flags detected after parsing."""


def _setup_logging() -> None:
    level = os.environ.get("GAK_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(message)s")


def _write_json(payload: dict, path: str | None) -> None:
    payload = {"schema": SCHEMA_VERSION, **payload}
    text = json.dumps(payload, indent=2) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _write_words_tsv(words: list[tuple[str, float, float]], path: str) -> None:
    Path(path).write_text("".join(f"{w}\t{s:g}\t{e:g}\n" for w, s, e in words))


def _path_report(path, words) -> dict:
    return {
        "states": path.states,
        "frame_labels": path.frame_labels,
        "score": path.score,
        "label_segments": [
            {"token": t, "start_frame": s, "end_frame": e} for t, s, e in path.label_segments
        ],
        "word_segments": [{"word": w, "start_ms": s, "end_ms": e} for w, s, e in words],
    }


# --- subcommand handlers ---


def _cmd_saliency(args: argparse.Namespace) -> int:
    if args.frame_shift_ms not in STANDARD_SHIFTS_MS and not args.allow_any_shift:
        raise ShapeError(
            f"frame shift {args.frame_shift_ms} ms is non-standard; pass --allow-any-shift"
        )
    tensor = load_array(args.grads)
    if tensor.ndim != 3:
        raise ShapeError(f"saliency needs a rank-3 gradient tensor, got rank {tensor.ndim}")
    report = validation_report(tensor)
    if not report.clean:
        log.warning("gradient tensor has %d NaN / %d Inf entries", report.n_nan, report.n_inf)
    grads = GradientTensor(tensor, frame_shift_ms=args.frame_shift_ms, layer_tag=args.layer_tag)
    sal = reduce_gradients(grads, floor=args.floor)
    store_array(sal.values, args.out)
    log.info("wrote %s (%d x %d)", args.out, *sal.values.shape)
    return 0


def _resolve_blank(args: argparse.Namespace) -> float:
    if args.blank_score is not None:
        return args.blank_score
    return default_blank_score(args.frame_shift_ms)


def _cmd_align_grad(args: argparse.Namespace) -> int:
    blank = _resolve_blank(args)
    if args.dump_config:
        _write_json(
            {
                "subcommand": "align grad",
                "frame_shift_ms": args.frame_shift_ms,
                "blank_score": blank,
                "softmax": not args.no_softmax,
                "marker": args.marker,
            },
            None,
        )
        return 0
    if not (args.scores and args.labels and args.out):
        raise _UsageError("--scores, --labels, and --out are required unless --dump-config")
    labels = parse_label_file(args.labels, marker=args.marker)
    values = load_array(args.scores)
    if values.ndim != 2:
        raise ShapeError(f"score matrix must be rank 2, got rank {values.ndim}")
    if values.shape[0] == len(labels) + 1:
        values = values[:-1]  # final row is the EOS label: excluded from alignment
    elif values.shape[0] != len(labels):
        raise ShapeError(f"{values.shape[0]} score rows for {len(labels)} labels")
    scores = ScoreMatrix(values, frame_shift_ms=args.frame_shift_ms)
    if not args.no_softmax:
        scores = time_log_softmax(scores, floor_value=DEFAULT_FLOOR)
    path = viterbi_align(scores, labels, blank_score=blank)
    words = path_to_words(path, labels, args.frame_shift_ms, marker=args.marker)
    _write_words_tsv(words, args.out)
    if args.path_out:
        _write_json(_path_report(path, words), args.path_out)
    log.info("alignment score %.6f, %d words", path.score, len(words))
    return 0


def _cmd_align_ctc(args: argparse.Namespace) -> int:
    if args.dump_config:
        _write_json(
            {"subcommand": "align ctc", "frame_shift_ms": args.frame_shift_ms},
            None,
        )
        return 0
    if not (args.logprobs and args.labels and args.out):
        raise _UsageError("--logprobs, --labels, and --out are required unless --dump-config")
    labels = parse_label_file(args.labels)
    values = load_array(args.logprobs)
    if values.ndim != 2:
        raise ShapeError(f"posterior matrix must be rank 2, got rank {values.ndim}")
    post = PosteriorMatrix(values, frame_shift_ms=args.frame_shift_ms)
    path = ctc_viterbi_align(post, labels)
    words = path_to_words(path, labels, args.frame_shift_ms)
    _write_words_tsv(words, args.out)
    if args.path_out:
        _write_json(_path_report(path, words), args.path_out)
    return 0


def _tse_pair(hyp_path: Path, ref_path: Path, match: str):
    hyp = parse_alignment(hyp_path)
    ref = parse_alignment(ref_path)
    return compute_tse(hyp, ref, match_mode=match)


def _cmd_tse(args: argparse.Namespace) -> int:
    hyp, ref = Path(args.hyp), Path(args.ref)
    if hyp.is_dir() != ref.is_dir():
        raise ShapeError("--hyp and --ref must both be files or both be directories")
    if hyp.is_dir():
        names = sorted(p.name for p in hyp.iterdir() if p.is_file())
        missing = [n for n in names if not (ref / n).exists()]
        if missing:
            raise ShapeError(f"reference alignment missing for {missing[:5]}")
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            reports = list(
                pool.map(lambda n: _tse_pair(hyp / n, ref / n, args.match), names)
            )
        totals = merge_reports(reports)
        payload = {
            "corpus": True,
            "n_utterances": len(names),
            "boundary_tse_ms": totals.boundary_tse_ms,
            "center_tse_ms": totals.center_tse_ms,
            "n_words": totals.n_words,
            "utterances": {
                name: {
                    "boundary_tse_ms": r.boundary_tse_ms,
                    "center_tse_ms": r.center_tse_ms,
                    "n_words": r.n_words,
                }
                for name, r in zip(names, reports)
            },
        }
    else:
        report = _tse_pair(hyp, ref, args.match)
        payload = {"corpus": False, **report.to_dict()}
    _write_json(payload, args.json)
    if not args.json:
        return 0
    print(
        f"boundary TSE {payload['boundary_tse_ms']:.1f} ms, "
        f"center TSE {payload['center_tse_ms']:.1f} ms over {payload['n_words']} words"
    )
    return 0


def _cmd_flip(args: argparse.Namespace) -> int:
    values = load_array(args.att)
    att = AttentionMatrix(values, kind=args.kind)
    if args.kind == "cross":
        report = monotonicity(att, threshold=args.threshold)
        payload = {"kind": "cross", **report.to_dict()}
    else:
        score = reversal_score(att, band_frac=args.band_frac, energies=args.energies)
        payload = {"kind": "self", "reversal_score": score, "band_frac": args.band_frac}
    if args.heatmap:
        render_heatmap(
            values, args.heatmap, color=args.color, clip_percentile=args.clip_percentile
        )
        payload["heatmap"] = args.heatmap
    if args.json:
        _write_json(payload, None)
    else:
        summary = payload.get("verdict", payload.get("reversal_score"))
        print(summary)
    return 0


def _toy_config(args: argparse.Namespace) -> toy.ToyConfig:
    return toy.ToyConfig(
        n_frames=args.frames,
        n_labels=args.labels,
        vocab=args.vocab,
        encoder_mode=args.mode,
        cross_attention_mode=args.cross_mode,
        seed=args.seed,
        learning_rate=args.learning_rate,
        steps=args.steps,
        batch_size=args.batch_size,
        noise_scale=args.noise_scale,
    )


def _cmd_toy(args: argparse.Namespace) -> int:
    cfg = _toy_config(args)
    if args.toy_command == "gen":
        batch = toy.gen_synthetic(cfg, cfg.seed)
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        store_array(batch.features, out / "features.npy")
        (out / "labels.txt").write_text("".join(t + "\n" for t in batch.tokens))
        _write_words_tsv(batch.reference_words(cfg.frame_shift_ms), str(out / "ref_words.tsv"))
        print(f"wrote utterance with segments {batch.segments} to {out}")
        return 0
    if args.toy_command == "gradcheck":
        batch = toy.gen_synthetic(cfg, cfg.seed)
        report = toy.finite_diff_check(
            toy.init_params(cfg), batch, cfg, eps=args.eps, tol=args.tol
        )
        _write_json(report.to_dict(), None)
        return 0 if report.passed else 1
    # train / export
    result = toy.train(cfg, log_every=args.log_every)
    print(f"final training loss {np.mean(result.losses[-20:]):.4f} after {cfg.steps} steps")
    if args.toy_command == "export":
        manifest = toy.export_artifacts(result.params, result.eval_batch, cfg, args.out_dir)
        print(f"exported {manifest['shape']} gradient tensor to {args.out_dir}")
    return 0


def _cmd_array_show(args: argparse.Namespace) -> int:
    values = load_array(args.file)
    payload: dict = {"file": args.file, "shape": list(values.shape), "dtype": str(values.dtype)}
    if args.coords:
        samples = []
        for group in args.coords.split(";"):
            idx = tuple(int(c) for c in group.split(","))
            if len(idx) != values.ndim:
                raise ShapeError(f"coordinate {group!r} has wrong arity for rank {values.ndim}")
            samples.append({"index": list(idx), "value": float(values[idx])})
        payload["samples"] = samples
    _write_json(payload, None)
    return 0


# --- parser ---


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gak",
        description="Gradient-based forced alignment, TSE scoring, and attention flip diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("saliency", help="reduce a gradient tensor to a log-L2-norm matrix")
    p.add_argument("--grads", required=True, help="S x T x D gradient tensor file")
    p.add_argument("--out", required=True, help="output S x T matrix file")
    p.add_argument("--floor", type=float, default=DEFAULT_FLOOR,
                   help="value for zero-norm entries (default %(default)g)")
    p.add_argument("--frame-shift-ms", type=int, required=True,
                   help="frame shift of the tensor's time axis: 10 or 60")
    p.add_argument("--layer-tag", default="enc_in")
    p.add_argument("--allow-any-shift", action="store_true",
                   help="permit frame shifts other than 10/60 ms")
    p.set_defaults(func=_cmd_saliency)

    align = sub.add_parser("align", help="forced alignment").add_subparsers(
        dest="align_command", required=True
    )
    g = align.add_parser("grad", help="align a per-label score matrix")
    g.add_argument("--scores", help="S' x T (or with trailing EOS row) score matrix file")
    g.add_argument("--labels", help="label file, one token per line")
    g.add_argument("--frame-shift-ms", type=int, default=60)
    g.add_argument("--blank-score", type=float, default=None,
                   help="fixed per-frame blank score; default -4 for the 60 ms shift, "
                        "-6 for the 10 ms shift")
    g.add_argument("--no-softmax", action="store_true",
                   help="skip the per-row time log-softmax and align raw scores")
    g.add_argument("--marker", default="@@", help="word-continuation marker (default %(default)s)")
    g.add_argument("--out", help="word alignment TSV output")
    g.add_argument("--path-out", help="optional JSON dump of the full state path")
    g.add_argument("--dump-config", action="store_true",
                   help="print the resolved configuration as JSON and exit")
    g.set_defaults(func=_cmd_align_grad)

    c = align.add_parser("ctc", help="align frame log-posteriors with the CTC topology")
    c.add_argument("--logprobs", help="T x V log-posterior matrix file (blank = column 0)")
    c.add_argument("--labels", help="label file: token<TAB>vocab_id per line")
    c.add_argument("--frame-shift-ms", type=int, default=60)
    c.add_argument("--out", help="word alignment TSV output")
    c.add_argument("--path-out")
    c.add_argument("--dump-config", action="store_true")
    c.set_defaults(func=_cmd_align_ctc)

    t = sub.add_parser("tse", help="time-stamp-error of a hypothesis alignment")
    t.add_argument("--hyp", required=True, help="hypothesis TSV file or directory")
    t.add_argument("--ref", required=True, help="reference TSV file or directory")
    t.add_argument("--match", choices=["strict-text", "by-index"], default="strict-text")
    t.add_argument("--json", help="write the JSON report here instead of stdout")
    t.add_argument("--workers", type=int, default=4, help="corpus-mode worker pool size")
    t.set_defaults(func=_cmd_tse)

    f = sub.add_parser("flip", help="attention monotonicity / time-reversal diagnostics")
    f.add_argument("--att", required=True, help="attention matrix file")
    f.add_argument("--kind", choices=["cross", "self"], required=True)
    f.add_argument("--threshold", type=float, default=0.8,
                   help="|tau| needed for a monotonicity verdict (default %(default)s)")
    f.add_argument("--band-frac", type=float, default=0.05,
                   help="diagonal band half-width as a fraction of T (default %(default)s)")
    f.add_argument("--energies", action="store_true",
                   help="input rows are pre-softmax energies; normalize per row first")
    f.add_argument("--json", action="store_true", help="print the report as JSON")
    f.add_argument("--heatmap", help="also render an SVG heatmap to this path")
    f.add_argument("--color", choices=["grayscale", "viridis-like"], default="viridis-like")
    f.add_argument("--clip-percentile", type=float, default=0.0,
                   help="floor-clip values below this percentile before rendering")
    f.set_defaults(func=_cmd_flip)

    ty = sub.add_parser("toy", help="desk-scale encoder-decoder")
    ty_sub = ty.add_subparsers(dest="toy_command", required=True)
    for name, helptext in [
        ("gen", "write one synthetic utterance"),
        ("train", "train and report the final loss"),
        ("gradcheck", "finite-difference check of the hand-written backward"),
        ("export", "train, then dump gradients/attentions/labels/reference"),
    ]:
        tp = ty_sub.add_parser(name, help=helptext)
        tp.add_argument("--seed", type=int, default=0)
        tp.add_argument("--mode", default="standard",
                        choices=["standard", "reversed", "identity_self_attention"])
        tp.add_argument("--cross-mode", default="learned_mlp",
                        choices=["learned_mlp", "hard_center"])
        tp.add_argument("--steps", type=int, default=1200)
        tp.add_argument("--batch-size", type=int, default=8)
        tp.add_argument("--learning-rate", type=float, default=0.3)
        tp.add_argument("--frames", type=int, default=24)
        tp.add_argument("--labels", type=int, default=6)
        tp.add_argument("--vocab", type=int, default=12)
        tp.add_argument("--noise-scale", type=float, default=0.0)
        tp.add_argument("--log-every", type=int, default=0)
        if name in ("gen", "export"):
            tp.add_argument("--out-dir", required=True)
        if name == "gradcheck":
            tp.add_argument("--eps", type=float, default=1e-5)
            tp.add_argument("--tol", type=float, default=1e-4)
        tp.set_defaults(func=_cmd_toy)

    arr = sub.add_parser("array", help="array file utilities").add_subparsers(
        dest="array_command", required=True
    )
    a = arr.add_parser("show", help="print shape and sampled values of an array file")
    a.add_argument("--file", required=True)
    a.add_argument("--coords", help='semicolon-separated index tuples, e.g. "0,1,2;3,4,5"')
    a.set_defaults(func=_cmd_array_show)

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except GakError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
