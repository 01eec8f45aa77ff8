"""Time-stamp-error: mean absolute millisecond deviation of word boundaries.

Hypothesis and reference word alignments are compared positionally. The
boundary metric pools start and end deviations (each word contributes two
values); the center metric compares word midpoints, which is more robust
for peaky alignments. Silence entries in the reference are dropped before
comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import FormatError, SequenceMismatch, WordMismatch

DEFAULT_SILENCE_TOKENS = frozenset({"<sil>", "[SILENCE]"})


@dataclass
class WordAlignment:
    """Temporally ordered (word, start_ms, end_ms) entries, silence removed."""

    entries: list[tuple[str, float, float]]
    source_tag: str = ""

    def __post_init__(self) -> None:
        prev_end = None
        for word, start, end in self.entries:
            if not 0 <= start < end:
                raise FormatError(f"word {word!r}: bad span [{start}, {end}]")
            if prev_end is not None and start < prev_end:
                raise FormatError(f"word {word!r} overlaps its predecessor")
            prev_end = end

    @property
    def words(self) -> list[str]:
        return [w for w, _, _ in self.entries]


@dataclass
class TseReport:
    """Boundary and center TSE in ms with per-word diagnostics."""

    boundary_tse_ms: float
    center_tse_ms: float
    n_words: int
    per_word: list[tuple[str, float, float, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "boundary_tse_ms": self.boundary_tse_ms,
            "center_tse_ms": self.center_tse_ms,
            "n_words": self.n_words,
            "per_word": [
                {"word": w, "abs_d_start": ds, "abs_d_end": de, "abs_d_center": dc}
                for w, ds, de, dc in self.per_word
            ],
        }


def parse_alignment(
    path: str | Path,
    silence_tokens: frozenset[str] = DEFAULT_SILENCE_TOKENS,
) -> WordAlignment:
    """Reads a ``word<TAB>start_ms<TAB>end_ms`` file, dropping silence entries.

    Raises:
        FormatError: malformed line, start >= end, unordered or overlapping
            entries (checked after silence removal).
    """
    path = Path(path)
    entries: list[tuple[str, float, float]] = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise FormatError(f"{path}:{lineno}: expected 3 tab-separated fields")
        word = parts[0]
        try:
            start, end = float(parts[1]), float(parts[2])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: bad timestamps") from exc
        if word in silence_tokens:
            continue
        entries.append((word, start, end))
    return WordAlignment(entries=entries, source_tag=str(path))


def compute_tse(
    hyp: WordAlignment,
    ref: WordAlignment,
    match_mode: str = "strict-text",
) -> TseReport:
    """Boundary and center TSE of ``hyp`` against ``ref``.

    boundary = mean of all pooled |d_start| and |d_end| values (2 per word);
    center = mean |d_center|. Words are matched positionally; in
    ``strict-text`` mode the word texts must also agree case-insensitively.

    Raises:
        SequenceMismatch: word counts differ.
        WordMismatch: text differs at some position in strict-text mode.
    """
    if match_mode not in ("strict-text", "by-index"):
        raise ValueError(f"unknown match mode {match_mode!r}")
    if len(hyp.entries) != len(ref.entries):
        raise SequenceMismatch(
            f"{len(hyp.entries)} hypothesis words vs {len(ref.entries)} reference words"
        )
    per_word: list[tuple[str, float, float, float]] = []
    for i, ((hw, hs, he), (rw, rs, re)) in enumerate(zip(hyp.entries, ref.entries)):
        if match_mode == "strict-text" and hw.lower() != rw.lower():
            raise WordMismatch(f"position {i}: {hw!r} vs {rw!r}")
        d_center = abs((hs + he) / 2.0 - (rs + re) / 2.0)
        per_word.append((rw, abs(hs - rs), abs(he - re), d_center))
    n = len(per_word)
    boundary = sum(ds + de for _, ds, de, _ in per_word) / (2 * n) if n else 0.0
    center = sum(dc for _, _, _, dc in per_word) / n if n else 0.0
    return TseReport(
        boundary_tse_ms=boundary, center_tse_ms=center, n_words=n, per_word=per_word
    )


def merge_reports(reports: list[TseReport]) -> TseReport:
    """Micro-averaged corpus totals: every word weighs equally."""
    pooled = [pw for r in reports for pw in r.per_word]
    n = len(pooled)
    boundary = sum(ds + de for _, ds, de, _ in pooled) / (2 * n) if n else 0.0
    center = sum(dc for _, _, _, dc in pooled) / n if n else 0.0
    return TseReport(boundary_tse_ms=boundary, center_tse_ms=center, n_words=n, per_word=[])
