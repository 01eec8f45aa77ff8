"""Subword label sequences and their grouping into words.

Tokens carrying the BPE continuation marker (``@@`` by default) do not end
a word; the marker is stripped when tokens are joined into word strings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyLabels, FormatError

DEFAULT_CONTINUATION_MARKER = "@@"


@dataclass
class LabelSequence:
    """Ordered subword tokens with word-continuation flags, EOS already removed.

    ``word_continuation[i]`` is True iff token i does NOT end a word. The
    last token always ends a word. ``vocab_ids`` are optional and only
    needed for posterior-based alignment.
    """

    tokens: list[str]
    word_continuation: list[bool]
    vocab_ids: list[int] | None = field(default=None)

    def __post_init__(self) -> None:
        if not self.tokens:
            raise EmptyLabels("label sequence is empty")
        if len(self.word_continuation) != len(self.tokens):
            raise FormatError("word_continuation length differs from tokens")
        if self.word_continuation[-1]:
            raise FormatError(f"last token {self.tokens[-1]!r} must end a word")
        if self.vocab_ids is not None and len(self.vocab_ids) != len(self.tokens):
            raise FormatError("vocab_ids length differs from tokens")

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def from_tokens(
        cls,
        tokens: list[str],
        vocab_ids: list[int] | None = None,
        marker: str = DEFAULT_CONTINUATION_MARKER,
    ) -> "LabelSequence":
        cont = [t.endswith(marker) for t in tokens]
        if cont and cont[-1]:
            raise FormatError(f"last token {tokens[-1]!r} carries the continuation marker")
        return cls(tokens=list(tokens), word_continuation=cont, vocab_ids=vocab_ids)

    def words(self, marker: str = DEFAULT_CONTINUATION_MARKER) -> list[str]:
        """Joins tokens into words, stripping the continuation marker."""
        words: list[str] = []
        current = ""
        for token, cont in zip(self.tokens, self.word_continuation):
            current += token.removesuffix(marker) if cont else token
            if not cont:
                words.append(current)
                current = ""
        return words


def parse_label_file(
    path: str | Path, marker: str = DEFAULT_CONTINUATION_MARKER
) -> LabelSequence:
    """Reads one token per line; an optional TAB-separated vocab id may follow.

    Vocab ids are required for posterior-based (CTC) alignment and ignored
    by the score-matrix aligner.
    """
    tokens: list[str] = []
    ids: list[int] = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split("\t")
        tokens.append(parts[0])
        if len(parts) > 1:
            try:
                ids.append(int(parts[1]))
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: bad vocab id {parts[1]!r}") from exc
    if not tokens:
        raise EmptyLabels(f"{path}: no tokens")
    if ids and len(ids) != len(tokens):
        raise FormatError(f"{path}: vocab ids on some lines but not all")
    return LabelSequence.from_tokens(tokens, vocab_ids=ids or None, marker=marker)
