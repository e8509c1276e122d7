"""Deterministic word/punctuation tokenizer with sentence boundaries.

Rules, in order:
  * maximal runs of punctuation characters form one token ("..." stays one
    token); a punctuation token containing any of . ? ! ends a sentence
  * trailing clitics are split off: n't 's 're 've 'll 'd 'm
    ("she's" -> ["she", "'s"]);
  * everything containing an alphanumeric character is a word token.

Filler flagging is list membership over lowercase forms; the default list
over-counts "like"/"well" (every occurrence, not just filler-role ones) by
design, and the bigram "you know" flags both of its tokens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..corpus import EmptyTranscript

DEFAULT_FILLERS = frozenset({"um", "uh", "er", "ah", "hm", "mhm", "like", "well"})
FILLER_BIGRAM = ("you", "know")

_CLITICS = ("n't", "'s", "'re", "'ve", "'ll", "'d", "'m")
_SPLIT_RE = re.compile(r"[^\W_]+(?:['\-][^\W_]+)*'?|[^\w\s]+", re.UNICODE)
_TERMINATORS = set(".?!")


@dataclass(frozen=True)
class Token:
    surface: str
    lowercase: str
    is_word: bool
    is_filler: bool


@dataclass(frozen=True)
class TokenStream:
    tokens: tuple[Token, ...]
    sentence_boundaries: tuple[int, ...]  # indices of terminator tokens

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def words(self) -> list[str]:
        return [t.lowercase for t in self.tokens if t.is_word]

    @property
    def n_words(self) -> int:
        return sum(1 for t in self.tokens if t.is_word)

    def sentence_spans(self) -> list[tuple[int, int, bool]]:
        """(start, end_exclusive, terminated) spans; end includes the
        terminator token when present. A trailing unterminated run of
        tokens is its own span."""
        spans = []
        start = 0
        for b in self.sentence_boundaries:
            spans.append((start, b + 1, True))
            start = b + 1
        if start < len(self.tokens):
            spans.append((start, len(self.tokens), False))
        return spans


def _split_clitic(piece: str) -> list[str]:
    low = piece.lower()
    for cl in _CLITICS:
        if low.endswith(cl) and len(low) > len(cl):
            return [piece[: len(piece) - len(cl)], piece[len(piece) - len(cl):]]
    return [piece]


def tokenize(text: str, fillers: frozenset[str] = DEFAULT_FILLERS) -> TokenStream:
    if not text or not text.strip():
        raise EmptyTranscript("cannot tokenize empty text")

    pieces: list[str] = []
    for m in _SPLIT_RE.finditer(text):
        pieces.extend(_split_clitic(m.group(0)))

    tokens: list[Token] = []
    boundaries: list[int] = []
    for piece in pieces:
        low = piece.lower()
        is_word = any(c.isalnum() for c in piece)
        tokens.append(Token(piece, low, is_word, is_word and low in fillers))
        if not is_word and any(c in _TERMINATORS for c in piece):
            boundaries.append(len(tokens) - 1)

    # "you know" discourse filler: flag both tokens
    for i in range(len(tokens) - 1):
        if (tokens[i].lowercase, tokens[i + 1].lowercase) == FILLER_BIGRAM:
            tokens[i] = Token(tokens[i].surface, tokens[i].lowercase, True, True)
            tokens[i + 1] = Token(tokens[i + 1].surface, tokens[i + 1].lowercase, True, True)

    return TokenStream(tokens=tuple(tokens), sentence_boundaries=tuple(boundaries))


def count_words(text: str) -> int:
    """Word-token count under this tokenizer (punctuation excluded)."""
    try:
        return tokenize(text).n_words
    except EmptyTranscript:
        return 0
