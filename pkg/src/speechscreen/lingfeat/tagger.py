"""Lexicon + suffix-rule part-of-speech tagger.

The model is a versioned JSON file: a lowercase word -> tag lexicon, an
ordered list of (suffix, tag) rules tried longest-suffix-first, and a
default tag for anything left over. Deterministic by construction and
total: every token gets a tag, punctuation tokens always get PUNCT.
A replacement tagger only needs to honor ``pos_tag``'s signature.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .tokenize import TokenStream

MODEL_FORMAT = "lexicon-suffix-tagger/1"


class PosTag(Enum):
    NOUN = "NOUN"
    VERB = "VERB"
    ADJ = "ADJ"
    ADV = "ADV"
    PRON = "PRON"
    DET = "DET"
    ADP = "ADP"
    CONJ = "CONJ"
    NUM = "NUM"
    PART = "PART"
    INTJ = "INTJ"
    PUNCT = "PUNCT"
    X = "X"


class TaggerModelError(Exception):
    pass


@dataclass(frozen=True)
class TaggerModel:
    lexicon: dict[str, PosTag]
    suffix_rules: tuple[tuple[str, PosTag], ...]  # sorted longest first
    default: PosTag


def load_tagger(path: str | Path | None = None) -> TaggerModel:
    """Load a tagger model file; None loads the bundled model."""
    if path is None:
        raw = resources.files("speechscreen.data").joinpath(
            "tagger_model.json").read_text(encoding="utf-8")
    else:
        p = Path(path)
        if not p.exists():
            raise TaggerModelError(f"tagger model file not found: {p}")
        raw = p.read_text(encoding="utf-8")
    doc = json.loads(raw)
    if doc.get("format") != MODEL_FORMAT:
        raise TaggerModelError(
            f"unsupported tagger model format: {doc.get('format')!r}")
    lexicon = {w: PosTag(t) for w, t in doc["lexicon"].items()}
    rules = sorted(((s, PosTag(t)) for s, t in doc["suffix_rules"]),
                   key=lambda r: -len(r[0]))
    return TaggerModel(lexicon=lexicon, suffix_rules=tuple(rules),
                       default=PosTag(doc["default"]))


def _tag_word(word: str, model: TaggerModel) -> PosTag:
    if word in model.lexicon:
        return model.lexicon[word]
    if _is_numeric(word):
        return PosTag.NUM
    for suffix, tag in model.suffix_rules:
        if word.endswith(suffix) and len(word) > len(suffix) + 1:
            return tag
    return model.default


def _is_numeric(word: str) -> bool:
    try:
        float(word.replace(",", ""))
        return True
    except ValueError:
        return False


def pos_tag(stream: TokenStream, model: TaggerModel) -> list[PosTag]:
    """One tag per token, aligned with the stream."""
    return [PosTag.PUNCT if not tok.is_word else _tag_word(tok.lowercase, model)
            for tok in stream.tokens]
