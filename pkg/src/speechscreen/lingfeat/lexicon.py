"""Word-category lexicon: 11 top-level psycholinguistic categories.

The file format is a JSON map ``category -> [entries]`` where an entry is a
literal lowercase word or a stem marked with a trailing ``*`` (prefix
match). A small open stand-in lexicon is bundled; licensed lexicons in the
same 11-category shape can be supplied instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .tokenize import TokenStream

CATEGORY_NAMES = (
    "affective", "social", "cognition", "perception", "biological",
    "drives", "temporal", "relativity", "informal", "function",
    "personal_concerns",
)


class LexiconError(Exception):
    pass


@dataclass(frozen=True)
class CategoryLexicon:
    words: dict[str, frozenset[str]]   # category -> literal words
    stems: dict[str, tuple[str, ...]]  # category -> prefix stems

    def match_count(self, category: str, tokens: list[str]) -> int:
        literals = self.words[category]
        stems = self.stems[category]
        n = 0
        for tok in tokens:
            if tok in literals or any(tok.startswith(s) for s in stems):
                n += 1
        return n


def load_lexicon(path: str | Path | None = None) -> CategoryLexicon:
    """Load a category lexicon; None loads the bundled stand-in."""
    if path is None:
        raw = resources.files("speechscreen.data").joinpath(
            "category_lexicon.json").read_text(encoding="utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    doc = json.loads(raw)
    got = tuple(sorted(doc))
    if got != tuple(sorted(CATEGORY_NAMES)):
        raise LexiconError(
            f"lexicon must define exactly the 11 categories "
            f"{sorted(CATEGORY_NAMES)}, got {list(got)}")
    words: dict[str, frozenset[str]] = {}
    stems: dict[str, tuple[str, ...]] = {}
    for cat, entries in doc.items():
        lits, sts = set(), []
        for e in entries:
            if not isinstance(e, str) or not e:
                raise LexiconError(f"category {cat!r}: bad entry {e!r}")
            if e.endswith("*"):
                sts.append(e[:-1].lower())
            else:
                lits.add(e.lower())
        words[cat] = frozenset(lits)
        stems[cat] = tuple(sorted(set(sts)))
    return CategoryLexicon(words=words, stems=stems)


def liwc_counts(stream: TokenStream, lexicon: CategoryLexicon) -> dict[str, float]:
    """Per-category proportion of word tokens matched (0 when no words)."""
    tokens = stream.words
    n = len(tokens)
    out = {}
    for cat in CATEGORY_NAMES:
        hits = lexicon.match_count(cat, tokens) if n else 0
        out[cat] = hits / n if n else 0.0
    return out
