"""Gradient-based forced alignment toolkit.

Turns per-label input-gradient saliency into forced alignments via
dynamic programming over a blank-augmented label topology, scores
alignments against references with the time-stamp-error metric, and
detects time reversal in attention matrices. A differentiable toy
encoder-decoder generates end-to-end verified inputs.
"""

from .arrayio import load_array, store_array, validation_report
from .ctcalign import PosteriorMatrix, ctc_viterbi_align
from .flipdiag import (
    AttentionMatrix,
    MonotonicityReport,
    Verdict,
    monotonicity,
    render_heatmap,
    reversal_score,
)
from .gradalign import (
    AlignmentPath,
    ScoreMatrix,
    Topology,
    default_blank_score,
    path_to_words,
    time_log_softmax,
    viterbi_align,
)
from .labels import LabelSequence, parse_label_file
from .saliency import GradientTensor, SaliencyMatrix, reduce_gradients
from .tse import TseReport, WordAlignment, compute_tse, merge_reports, parse_alignment

__version__ = "0.1.0"

__all__ = [
    "AlignmentPath",
    "AttentionMatrix",
    "GradientTensor",
    "LabelSequence",
    "MonotonicityReport",
    "PosteriorMatrix",
    "SaliencyMatrix",
    "ScoreMatrix",
    "Topology",
    "TseReport",
    "Verdict",
    "WordAlignment",
    "compute_tse",
    "ctc_viterbi_align",
    "default_blank_score",
    "load_array",
    "merge_reports",
    "monotonicity",
    "parse_alignment",
    "parse_label_file",
    "path_to_words",
    "reduce_gradients",
    "render_heatmap",
    "reversal_score",
    "store_array",
    "time_log_softmax",
    "validation_report",
    "viterbi_align",
]
