"""Transcript ingestion: manifest loading, CHAT-format parsing, split views.

A corpus is described by a CSV manifest with header
``id,label,split,transcript_path[,age,sex,mmse,recording_len]``.
Transcript files are UTF-8 plain text or CHAT (TalkBank) format; for CHAT
files only participant (``*PAR:``) utterances are kept.

CHAT stripping table (applied to participant utterances):

    removed entirely   ``@`` header lines, ``%`` dependent tiers, non-PAR
                       speaker tiers, timing bullets (\\x15...\\x15),
                       bracketed codes ``[...]``, paralinguistic events
                       ``&=xxx``, untranscribed ``www``, pause marks
                       ``(.)``/``(..)`` , ``+``-prefixed utterance codes
                       (their terminator punctuation is kept)
    unwrapped          angle-bracket groups ``<...>`` (retraced material is
                       kept: repetitions are signal, not noise)
    normalized         ``&-um``/``&+fr``/``&um`` keep the bare token,
                       ``(be)cause`` -> ``because``, ``no:`` -> ``no``

Plain text with no tier markers passes through unchanged.
"""

from __future__ import annotations

import csv
import re
import statistics
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path


class Label(Enum):
    CASE = "case"
    CONTROL = "control"


class Split(Enum):
    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"


class CorpusError(Exception):
    """Base class for manifest/transcript loading failures."""


class EmptyTranscript(CorpusError):
    """No participant speech remained after parsing."""


class DuplicateId(CorpusError):
    pass


class UnknownLabel(CorpusError):
    pass


class UnknownSplit(CorpusError):
    pass


class UnreadableTranscript(CorpusError):
    pass


class ManifestError(CorpusError):
    pass


@dataclass(frozen=True)
class Transcript:
    id: str
    label: Label
    split: Split
    text: str
    word_count: int
    meta: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class Corpus:
    transcripts: tuple[Transcript, ...]

    def view(self, split: Split) -> list[Transcript]:
        """Transcripts of one split in stable id-sorted order."""
        return sorted((t for t in self.transcripts if t.split == split),
                      key=lambda t: t.id)

    def counts(self) -> dict[tuple[Split, Label], int]:
        out: dict[tuple[Split, Label], int] = {}
        for t in self.transcripts:
            k = (t.split, t.label)
            out[k] = out.get(k, 0) + 1
        return out


# Speaker tiers look like "*PAR:", "*INV:"; headers start with "@",
# dependent tiers with "%".
_TIER_RE = re.compile(r"^[*@%]")
_PAR_RE = re.compile(r"^\*PAR:\s*", re.IGNORECASE)
_SPEAKER_RE = re.compile(r"^\*[A-Za-z]{2,3}\d?:")
_BULLET_RE = re.compile("\x15[^\x15]*\x15")
_BRACKET_RE = re.compile(r"\[[^\][]*\]")
_EVENT_RE = re.compile(r"&=\S+")
_PAUSE_RE = re.compile(r"\(\.+\)")


def _looks_like_chat(raw: str) -> bool:
    for line in raw.splitlines():
        s = line.strip()
        if s.startswith("@") or _SPEAKER_RE.match(s):
            return True
    return False


def _clean_utterance(utt: str) -> str:
    utt = _BULLET_RE.sub(" ", utt)
    utt = _EVENT_RE.sub(" ", utt)
    # Strip bracketed codes, innermost first so nested [[..]..] cases drain.
    prev = None
    while prev != utt:
        prev = utt
        utt = _BRACKET_RE.sub(" ", utt)
    utt = _PAUSE_RE.sub(" ", utt)
    # Retraces/overlap scope: keep the words, drop the brackets.
    utt = utt.replace("<", " ").replace(">", " ")
    out_tokens = []
    for tok in utt.split():
        if tok in ("xxx", "yyy"):  # unintelligible: keep as placeholder token
            out_tokens.append(tok)
            continue
        if tok == "www":  # untranscribed material
            continue
        if tok.startswith("+"):
            # utterance-level code; keep only a trailing terminator
            term = tok.rstrip(".?!")
            punct = tok[len(term):]
            if punct:
                out_tokens.append(punct[-1])
            continue
        if tok.startswith("&"):
            # &-um filled pause, &+fr fragment, &um old-style filler
            bare = tok.lstrip("&-+=")
            if bare:
                out_tokens.append(bare)
            continue
        # shortened forms "(be)cause", lengthening "no:", ties "one_two"
        tok = tok.replace("(", "").replace(")", "")
        tok = re.sub(r"(?<=\w):", "", tok)
        tok = tok.replace("_", " ")
        tok = tok.strip("‡„")
        if tok:
            out_tokens.append(tok)
    return " ".join(out_tokens)


def parse_chat(raw: str) -> str:
    """Extract participant speech from CHAT text; plain text passes through.

    Raises EmptyTranscript when nothing remains after stripping.
    """
    if not _looks_like_chat(raw):
        if not raw.strip():
            raise EmptyTranscript("transcript is empty")
        return raw

    # Join continuation lines (indented) onto their tier line.
    lines: list[str] = []
    for line in raw.splitlines():
        if line[:1] in ("\t", " ") and lines:
            lines[-1] += " " + line.strip()
        else:
            lines.append(line.rstrip())

    utterances = []
    for line in lines:
        m = _PAR_RE.match(line)
        if not m:
            continue
        cleaned = _clean_utterance(line[m.end():])
        if cleaned:
            utterances.append(cleaned)

    text = re.sub(r"\s+", " ", " ".join(utterances)).strip()
    if not text:
        raise EmptyTranscript("no participant speech after stripping")
    return text


_OPTIONAL_COLUMNS = ("age", "sex", "mmse", "recording_len")


def load_manifest(path: str | Path, word_counter=None) -> Corpus:
    """Load a manifest CSV and parse every referenced transcript.

    `word_counter` maps transcript text to a word count; defaults to the
    lingfeat tokenizer's word-token count so manifest stats and feature
    denominators agree.
    """
    if word_counter is None:
        from .lingfeat import count_words
        word_counter = count_words

    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ManifestError(f"{path}: empty manifest")
        required = {"id", "label", "split", "transcript_path"}
        missing = required - set(reader.fieldnames)
        if missing:
            raise ManifestError(f"{path}: missing columns {sorted(missing)}")
        unknown = set(reader.fieldnames) - required - set(_OPTIONAL_COLUMNS)
        if unknown:
            raise ManifestError(f"{path}: unknown columns {sorted(unknown)}")

        transcripts: list[Transcript] = []
        seen: set[str] = set()
        for rownum, row in enumerate(reader, start=2):
            tid = (row["id"] or "").strip()
            if not tid:
                raise ManifestError(f"{path}:{rownum}: blank id")
            if tid in seen:
                raise DuplicateId(f"{path}:{rownum}: duplicate id {tid!r}")
            seen.add(tid)
            try:
                label = Label(row["label"].strip().lower())
            except ValueError:
                raise UnknownLabel(
                    f"{path}:{rownum}: id {tid!r}: unknown label {row['label']!r}")
            try:
                split = Split(row["split"].strip().lower())
            except ValueError:
                raise UnknownSplit(
                    f"{path}:{rownum}: id {tid!r}: unknown split {row['split']!r}")
            tpath = Path(row["transcript_path"])
            if not tpath.is_absolute():
                tpath = path.parent / tpath
            try:
                raw = tpath.read_text(encoding="utf-8")
            except OSError as exc:
                raise UnreadableTranscript(
                    f"{path}:{rownum}: id {tid!r}: cannot read {tpath}: {exc}")
            try:
                text = parse_chat(raw).strip()
            except EmptyTranscript:
                raise EmptyTranscript(
                    f"{path}:{rownum}: id {tid!r}: no participant speech in {tpath}")
            meta = {k: row[k] for k in _OPTIONAL_COLUMNS
                    if k in row and row[k] not in (None, "")}
            transcripts.append(Transcript(
                id=tid, label=label, split=split, text=text,
                word_count=word_counter(text), meta=meta))

    return Corpus(transcripts=tuple(transcripts))


def split_view(corpus: Corpus, split: Split) -> list[Transcript]:
    return corpus.view(split)


def corpus_stats(corpus: Corpus) -> list[dict]:
    """Word-count summary per split x label.

    Std is the sample estimator (n-1 denominator, 0 for n=1); quartiles use
    linear interpolation.
    """
    rows = []
    for split in Split:
        for label in Label:
            counts = [t.word_count for t in corpus.transcripts
                      if t.split == split and t.label == label]
            if not counts:
                continue
            counts.sort()
            q1, q2, q3 = _quartiles(counts)
            rows.append({
                "split": split.value,
                "label": label.value,
                "n": len(counts),
                "word_count_mean": statistics.fmean(counts),
                "word_count_std": statistics.stdev(counts) if len(counts) > 1 else 0.0,
                "word_count_min": counts[0],
                "word_count_max": counts[-1],
                "word_count_q25": q1,
                "word_count_q50": q2,
                "word_count_q75": q3,
            })
    return rows


def _quartiles(sorted_vals: list[int]) -> tuple[float, float, float]:
    def pct(p: float) -> float:
        if len(sorted_vals) == 1:
            return float(sorted_vals[0])
        pos = p * (len(sorted_vals) - 1)
        lo = int(pos)
        frac = pos - lo
        if lo + 1 < len(sorted_vals):
            return sorted_vals[lo] * (1 - frac) + sorted_vals[lo + 1] * frac
        return float(sorted_vals[lo])

    return pct(0.25), pct(0.50), pct(0.75)
