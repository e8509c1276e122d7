"""The frozen 110-feature registry.

Dimensions and composition (richness 24, syntax 39, fluency 25,
psycholinguistic 22; total 110). Every definition is computable from the
token stream, the POS tags, and the category lexicon alone.

Feature kinds drive the property-test contracts:
  ratio    in [0,1]; numerator and denominator are per-token, so the value
           is invariant under text duplication
  count    non-negative; exactly doubles under text duplication
  ttr      non-increasing under text duplication
  mean     per-token mean/spread; invariant under text duplication
  bounded  in [0,1], no duplication law
  size     non-negative, no duplication law
  index    finite and non-negative, nothing else promised

Degenerate denominators: any a/b with b = 0 evaluates to 0. The
vocabulary-richness statistic with a log singularity (all words hapax)
also takes 0.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from typing import Callable

from .tokenize import TokenStream
from .tagger import PosTag
from .lexicon import CategoryLexicon, CATEGORY_NAMES

RICHNESS = "richness"
SYNTAX = "syntax"
FLUENCY = "fluency"
PSYCHOLINGUISTIC = "psycholinguistic"
DIMENSIONS = (RICHNESS, SYNTAX, FLUENCY, PSYCHOLINGUISTIC)

_FREQ_RANKS: dict[str, int] | None = None


def _freq_ranks() -> dict[str, int]:
    global _FREQ_RANKS
    if _FREQ_RANKS is None:
        doc = json.loads(resources.files("speechscreen.data").joinpath(
            "word_frequency.json").read_text(encoding="utf-8"))
        _FREQ_RANKS = {w: i + 1 for i, w in enumerate(doc["words"])}
    return _FREQ_RANKS


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


class FeatureContext:
    """Shared intermediates for one transcript's feature pass."""

    def __init__(self, stream: TokenStream, tags: list[PosTag],
                 lexicon: CategoryLexicon):
        self.stream = stream
        self.tags = tags
        self.lexicon = lexicon
        self.n_tokens = len(stream.tokens)
        self.words = stream.words
        self.n = len(self.words)
        self.counter = Counter(self.words)
        self.v = len(self.counter)
        self.v1 = sum(1 for c in self.counter.values() if c == 1)
        self.v2 = sum(1 for c in self.counter.values() if c == 2)
        self.word_lengths = [len(w) for w in self.words]
        self.tag_counts = Counter(tags)
        # adjacent word-word tag pairs (pairs touching punctuation excluded)
        self.tag_pairs: list[tuple[PosTag, PosTag]] = []
        toks = stream.tokens
        for i in range(len(toks) - 1):
            if toks[i].is_word and toks[i + 1].is_word:
                self.tag_pairs.append((tags[i], tags[i + 1]))
        self.pair_counts = Counter(self.tag_pairs)
        # sentences = spans containing at least one word token
        self.sentences = [(s, e, term) for (s, e, term) in stream.sentence_spans()
                          if any(t.is_word for t in toks[s:e])]
        self.sent_word_lens = [sum(1 for t in toks[s:e] if t.is_word)
                               for (s, e, _) in self.sentences]
        self.sent_token_lens = [e - s for (s, e, _) in self.sentences]
        self.filler_count = sum(1 for t in toks if t.is_filler)
        ranks = _freq_ranks()
        self.word_ranks = [ranks.get(w) for w in self.words]


def _mattr(ctx: FeatureContext, window: int) -> float:
    if ctx.n == 0:
        return 0.0
    w = min(window, ctx.n)
    ttrs = []
    for i in range(ctx.n - w + 1):
        seg = ctx.words[i:i + w]
        ttrs.append(len(set(seg)) / w)
    return sum(ttrs) / len(ttrs)


def _pop_std(vals: list[float]) -> float:
    if not vals:
        return 0.0
    m = sum(vals) / len(vals)
    return math.sqrt(sum((v - m) ** 2 for v in vals) / len(vals))


def _immediate_reps(ctx: FeatureContext) -> int:
    return sum(1 for i in range(1, ctx.n) if ctx.words[i] == ctx.words[i - 1])


def _gapped_reps(ctx: FeatureContext) -> int:
    w = ctx.words
    return sum(1 for j in range(ctx.n)
               if any(w[i] == w[j] for i in range(max(0, j - 5), j - 1)))


def _imm_bigram_reps(ctx: FeatureContext) -> int:
    w = ctx.words
    return sum(1 for j in range(ctx.n - 3)
               if (w[j], w[j + 1]) == (w[j + 2], w[j + 3]))


def _gapped_bigram_reps(ctx: FeatureContext) -> int:
    w = ctx.words
    n = 0
    for m in range(ctx.n - 1):
        big_m = (w[m], w[m + 1])
        if any((w[j], w[j + 1]) == big_m
               for j in range(max(0, m - 10), max(0, m - 2))):
            n += 1
    return n


def _honore(ctx: FeatureContext) -> float:
    if ctx.n == 0 or ctx.v == 0 or ctx.v1 == ctx.v:
        return 0.0
    return 100.0 * math.log(ctx.n) / (1.0 - ctx.v1 / ctx.v)


def _brunet(ctx: FeatureContext) -> float:
    if ctx.n == 0 or ctx.v == 0:
        return 0.0
    return ctx.n ** (ctx.v ** -0.165)


def _log_ttr(ctx: FeatureContext) -> float:
    if ctx.n <= 1 or ctx.v < 1:
        return 0.0
    return math.log(ctx.v) / math.log(ctx.n)


def _freq_band(ctx: FeatureContext, lo: int, hi: float) -> float:
    hits = sum(1 for r in ctx.word_ranks if r is not None and lo <= r <= hi)
    return _ratio(hits, ctx.n)


def _consecutive_fillers(ctx: FeatureContext) -> int:
    toks = ctx.stream.tokens
    return sum(1 for i in range(1, len(toks))
               if toks[i].is_filler and toks[i - 1].is_filler)


def _token_count(ctx: FeatureContext, word: str) -> int:
    return ctx.counter.get(word, 0)


def _you_know(ctx: FeatureContext) -> int:
    w = ctx.words
    return sum(1 for i in range(ctx.n - 1) if (w[i], w[i + 1]) == ("you", "know"))


@dataclass(frozen=True)
class FeatureDef:
    name: str
    dimension: str
    kind: str
    definition: str
    compute: Callable[[FeatureContext], float]


# The 23 tag bigrams tracked as syntactic-pattern proportions.
_TAG_BIGRAMS = [
    ("DET", "NOUN"), ("DET", "ADJ"), ("ADJ", "NOUN"), ("NOUN", "VERB"),
    ("PRON", "VERB"), ("VERB", "DET"), ("VERB", "PRON"), ("VERB", "ADP"),
    ("VERB", "ADV"), ("VERB", "VERB"), ("ADP", "DET"), ("ADP", "NOUN"),
    ("ADP", "PRON"), ("NOUN", "ADP"), ("NOUN", "CONJ"), ("CONJ", "DET"),
    ("CONJ", "PRON"), ("ADV", "VERB"), ("ADV", "ADJ"), ("NOUN", "NOUN"),
    ("PART", "VERB"), ("VERB", "PART"), ("PRON", "NOUN"),
]

_REGISTRY: list[FeatureDef] | None = None


def _build() -> list[FeatureDef]:
    feats: list[FeatureDef] = []

    def add(name, dimension, kind, definition, compute):
        feats.append(FeatureDef(name, dimension, kind, definition, compute))

    # ----------------------------------------------------- richness (24) --
    add("word_token_count", RICHNESS, "count",
        "number of word tokens", lambda c: float(c.n))
    add("unique_word_count", RICHNESS, "size",
        "number of distinct word types", lambda c: float(c.v))
    add("type_token_ratio", RICHNESS, "ttr",
        "distinct word types / word tokens", lambda c: _ratio(c.v, c.n))
    add("guiraud_index", RICHNESS, "ttr",
        "types / sqrt(tokens)", lambda c: _ratio(c.v, math.sqrt(c.n)) if c.n else 0.0)
    add("log_ttr", RICHNESS, "ttr",
        "log(types) / log(tokens); 0 when tokens <= 1", _log_ttr)
    add("mattr_10", RICHNESS, "bounded",
        "moving-average TTR, window 10 (window shrinks to text length)",
        lambda c: _mattr(c, 10))
    add("mattr_25", RICHNESS, "bounded",
        "moving-average TTR, window 25", lambda c: _mattr(c, 25))
    add("mattr_50", RICHNESS, "bounded",
        "moving-average TTR, window 50", lambda c: _mattr(c, 50))
    add("mattr_100", RICHNESS, "bounded",
        "moving-average TTR, window 100", lambda c: _mattr(c, 100))
    add("brunet_index", RICHNESS, "index",
        "tokens ^ (types ^ -0.165); lower = richer vocabulary", _brunet)
    add("honore_statistic", RICHNESS, "index",
        "100 * log(tokens) / (1 - hapax/types); 0 when all words are hapax",
        _honore)
    add("hapax_count", RICHNESS, "size",
        "types occurring exactly once", lambda c: float(c.v1))
    add("hapax_ratio", RICHNESS, "ttr",
        "hapax types / word tokens", lambda c: _ratio(c.v1, c.n))
    add("hapax_type_ratio", RICHNESS, "ttr",
        "hapax types / types", lambda c: _ratio(c.v1, c.v))
    add("dislegomena_count", RICHNESS, "size",
        "types occurring exactly twice", lambda c: float(c.v2))
    add("sichel_s", RICHNESS, "bounded",
        "dislegomena types / types", lambda c: _ratio(c.v2, c.v))
    add("mean_word_length", RICHNESS, "mean",
        "mean characters per word token",
        lambda c: _ratio(sum(c.word_lengths), c.n))
    add("std_word_length", RICHNESS, "mean",
        "population std of characters per word token",
        lambda c: _pop_std(c.word_lengths))
    add("long_word_ratio", RICHNESS, "ratio",
        "word tokens with >= 7 characters / word tokens",
        lambda c: _ratio(sum(1 for L in c.word_lengths if L >= 7), c.n))
    add("short_word_ratio", RICHNESS, "ratio",
        "word tokens with <= 3 characters / word tokens",
        lambda c: _ratio(sum(1 for L in c.word_lengths if L <= 3), c.n))
    add("freq_top100_ratio", RICHNESS, "ratio",
        "tokens among the 100 most frequent list words / word tokens",
        lambda c: _freq_band(c, 1, 100))
    add("freq_mid_ratio", RICHNESS, "ratio",
        "tokens with frequency rank 101-500 / word tokens",
        lambda c: _freq_band(c, 101, 500))
    add("freq_low_ratio", RICHNESS, "ratio",
        "tokens with frequency rank > 500 (still listed) / word tokens",
        lambda c: _freq_band(c, 501, math.inf))
    add("freq_oov_ratio", RICHNESS, "ratio",
        "tokens absent from the frequency list / word tokens",
        lambda c: _ratio(sum(1 for r in c.word_ranks if r is None), c.n))

    # ------------------------------------------------------- syntax (39) --
    for tag in PosTag:
        add(f"pos_prop_{tag.value.lower()}", SYNTAX, "ratio",
            f"{tag.value} tokens / all tokens",
            (lambda t: lambda c: _ratio(c.tag_counts.get(t, 0), c.n_tokens))(tag))

    for t1, t2 in _TAG_BIGRAMS:
        add(f"bigram_{t1.lower()}_{t2.lower()}", SYNTAX, "bounded",
            f"adjacent {t1}->{t2} word pairs / adjacent word pairs",
            (lambda a, b: lambda c: _ratio(
                c.pair_counts.get((PosTag(a), PosTag(b)), 0),
                len(c.tag_pairs)))(t1, t2))

    add("mean_sentence_length", SYNTAX, "index",
        "mean tokens (words + punctuation) per sentence",
        lambda c: _ratio(sum(c.sent_token_lens), len(c.sentences)))
    add("pronoun_noun_ratio", SYNTAX, "index",
        "PRON tokens / NOUN tokens; 0 when no nouns",
        lambda c: _ratio(c.tag_counts.get(PosTag.PRON, 0),
                         c.tag_counts.get(PosTag.NOUN, 0)))
    add("verbs_per_sentence", SYNTAX, "index",
        "VERB tokens / sentences",
        lambda c: _ratio(c.tag_counts.get(PosTag.VERB, 0), len(c.sentences)))

    # ------------------------------------------------------ fluency (25) --
    add("filler_count", FLUENCY, "count",
        "tokens flagged as fillers", lambda c: float(c.filler_count))
    add("filler_ratio", FLUENCY, "ratio",
        "filler tokens / word tokens", lambda c: _ratio(c.filler_count, c.n))
    add("um_uh_count", FLUENCY, "count",
        "um + uh tokens",
        lambda c: float(_token_count(c, "um") + _token_count(c, "uh")))
    add("immediate_repetition_count", FLUENCY, "size",
        "adjacent identical word tokens (the primary repetition measure)",
        lambda c: float(_immediate_reps(c)))
    add("immediate_repetition_ratio", FLUENCY, "bounded",
        "immediate repetitions / (word tokens - 1)",
        lambda c: _ratio(_immediate_reps(c), c.n - 1))
    add("gapped_repetition_count", FLUENCY, "size",
        "words recurring within the previous 5 words (non-adjacent)",
        lambda c: float(_gapped_reps(c)))
    add("gapped_repetition_ratio", FLUENCY, "bounded",
        "gapped repetitions / word tokens",
        lambda c: _ratio(_gapped_reps(c), c.n))
    add("immediate_bigram_repetition_count", FLUENCY, "size",
        "word bigrams immediately repeated verbatim",
        lambda c: float(_imm_bigram_reps(c)))
    add("immediate_bigram_repetition_ratio", FLUENCY, "bounded",
        "immediate bigram repetitions / (word tokens - 3)",
        lambda c: _ratio(_imm_bigram_reps(c), c.n - 3))
    add("gapped_bigram_repetition_count", FLUENCY, "size",
        "bigrams recurring at word offsets 3-10",
        lambda c: float(_gapped_bigram_reps(c)))
    add("gapped_bigram_repetition_ratio", FLUENCY, "bounded",
        "gapped bigram repetitions / (word tokens - 1)",
        lambda c: _ratio(_gapped_bigram_reps(c), c.n - 1))
    add("incomplete_sentence_count", FLUENCY, "size",
        "trailing sentence left without a terminator",
        lambda c: float(sum(1 for (_, _, term) in c.sentences if not term)))
    add("mean_utterance_length", FLUENCY, "index",
        "mean word tokens per sentence",
        lambda c: _ratio(sum(c.sent_word_lens), len(c.sentences)))
    add("std_utterance_length", FLUENCY, "index",
        "population std of word tokens per sentence",
        lambda c: _pop_std(c.sent_word_lens))
    add("max_utterance_length", FLUENCY, "size",
        "word tokens in the longest sentence",
        lambda c: float(max(c.sent_word_lens, default=0)))
    add("min_utterance_length", FLUENCY, "size",
        "word tokens in the shortest sentence",
        lambda c: float(min(c.sent_word_lens, default=0)))
    add("single_word_sentence_count", FLUENCY, "size",
        "sentences containing exactly one word token",
        lambda c: float(sum(1 for L in c.sent_word_lens if L == 1)))
    add("short_sentence_ratio", FLUENCY, "bounded",
        "sentences with < 3 word tokens / sentences",
        lambda c: _ratio(sum(1 for L in c.sent_word_lens if L < 3),
                         len(c.sentences)))
    add("consecutive_filler_count", FLUENCY, "size",
        "adjacent token pairs that are both fillers",
        lambda c: float(_consecutive_fillers(c)))
    add("fillers_per_sentence", FLUENCY, "index",
        "filler tokens / sentences",
        lambda c: _ratio(c.filler_count, len(c.sentences)))
    add("repetition_density", FLUENCY, "index",
        "(immediate word + bigram repetitions) / word tokens",
        lambda c: _ratio(_immediate_reps(c) + _imm_bigram_reps(c), c.n))
    add("top_word_frequency_ratio", FLUENCY, "bounded",
        "occurrences of the most frequent word / word tokens",
        lambda c: _ratio(max(c.counter.values(), default=0), c.n))
    add("you_know_count", FLUENCY, "size",
        "occurrences of the discourse marker 'you know'",
        lambda c: float(_you_know(c)))
    add("like_count", FLUENCY, "count",
        "occurrences of 'like' (counted unconditionally)",
        lambda c: float(_token_count(c, "like")))
    add("well_count", FLUENCY, "count",
        "occurrences of 'well' (counted unconditionally)",
        lambda c: float(_token_count(c, "well")))

    # ---------------------------------------------- psycholinguistic (22) --
    for cat in CATEGORY_NAMES:
        add(f"cat_prop_{cat}", PSYCHOLINGUISTIC, "ratio",
            f"tokens matching the '{cat}' category / word tokens",
            (lambda cc: lambda c: _ratio(
                c.lexicon.match_count(cc, c.words), c.n))(cat))
    for cat in CATEGORY_NAMES:
        add(f"cat_hits_{cat}", PSYCHOLINGUISTIC, "count",
            f"tokens matching the '{cat}' category",
            (lambda cc: lambda c: float(
                c.lexicon.match_count(cc, c.words)))(cat))

    assert len(feats) == 110, f"registry has {len(feats)} features, want 110"
    by_dim = Counter(f.dimension for f in feats)
    assert by_dim == Counter({RICHNESS: 24, SYNTAX: 39, FLUENCY: 25,
                              PSYCHOLINGUISTIC: 22}), by_dim
    return feats


def feature_registry() -> list[FeatureDef]:
    """The frozen registry, in canonical column order."""
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = _build()
    return list(_REGISTRY)
