"""Bundled synthetic toy corpora for offline pipeline runs and tests.

Two shapes:
  * "toy": 60 fluent (control) + 60 disfluent (case) templated picture
    descriptions, split 30/15/15 per class;
  * "study": 237 transcripts with the split x label counts of the real
    study cohort (train 60/56, validation 27/23, test 35/36).

Texts are deterministic given the seed. Disfluent texts carry fillers,
repetitions, and fragments; fluent texts carry longer well-formed
sentences and a wider vocabulary, so both the linguistic features and the
hashed bag-of-words pseudo-embeddings separate the classes.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .corpus import Corpus, Label, Split, Transcript
from .lingfeat import tokenize

_SUBJECTS = ["the little boy", "the young girl", "the mother", "the woman",
             "her brother", "his sister", "the child"]
_FLUENT_ACTIONS = [
    "is reaching up toward the cookie jar on the highest shelf",
    "is standing on a three-legged stool that has begun to tip",
    "is drying the dishes beside the overflowing sink",
    "is passing a cookie down to his sister with a grin",
    "is gazing out the open window at the garden",
    "appears entirely unaware that water is spilling onto the floor",
    "is holding a plate while the faucet keeps running",
]
_FLUENT_EXTRAS = [
    "Meanwhile the curtains drift in the summer breeze and the yard outside looks calm.",
    "The whole scene suggests a quiet afternoon about to go wrong in two places at once.",
    "Water has already pooled across the kitchen floor beneath her feet.",
    "The jar sits on the top shelf of the cupboard, just beyond a comfortable reach.",
    "She seems absorbed in her task while the children carry out their small conspiracy.",
    "The stool wobbles precariously, promising an imminent tumble.",
    "Everything about the kitchen looks ordinary except for the growing puddle.",
]
_DISFLUENT_BITS = [
    "um the boy the boy is on the stool",
    "uh there is a a jar up there",
    "the the girl wants um wants a cookie",
    "water is um water is running over",
    "she is uh washing washing the dishes",
    "um i see a a window",
    "the stool is uh is tipping",
    "cookies in the in the jar",
    "uh the mother the mother does not see",
    "um the floor is wet the floor",
]
_DISFLUENT_TAILS = ["and um", "uh", "so the", "well um", "and and", "hm"]


def _fluent_text(rng: np.random.Generator) -> str:
    n_sent = int(rng.integers(4, 7))
    sentences = []
    for _ in range(n_sent):
        if rng.random() < 0.45:
            sentences.append(str(rng.choice(_FLUENT_EXTRAS)))
        else:
            subj = str(rng.choice(_SUBJECTS))
            act = str(rng.choice(_FLUENT_ACTIONS))
            sentences.append(f"{subj.capitalize()} {act}.")
    return " ".join(sentences)


def _disfluent_text(rng: np.random.Generator) -> str:
    n_bits = int(rng.integers(5, 9))
    parts = []
    for _ in range(n_bits):
        parts.append(str(rng.choice(_DISFLUENT_BITS)))
        if rng.random() < 0.6:
            parts.append(str(rng.choice(_DISFLUENT_TAILS)))
        parts.append(".")
    return " ".join(parts)


_TOY_PLAN = [(Split.TRAIN, 30, 30), (Split.VALIDATION, 15, 15),
             (Split.TEST, 15, 15)]
_STUDY_PLAN = [(Split.TRAIN, 60, 56), (Split.VALIDATION, 27, 23),
               (Split.TEST, 35, 36)]


def build_corpus(shape: str = "toy", seed: int = 7) -> Corpus:
    plan = {"toy": _TOY_PLAN, "study": _STUDY_PLAN}.get(shape)
    if plan is None:
        raise ValueError(f"unknown toy corpus shape {shape!r}")
    rng = np.random.default_rng(seed)
    transcripts = []
    idx = 0
    for split, n_case, n_control in plan:
        for label, count in ((Label.CASE, n_case), (Label.CONTROL, n_control)):
            for _ in range(count):
                text = (_disfluent_text(rng) if label is Label.CASE
                        else _fluent_text(rng))
                transcripts.append(Transcript(
                    id=f"T{idx:04d}", label=label, split=split, text=text,
                    word_count=tokenize(text).n_words))
                idx += 1
    return Corpus(transcripts=tuple(transcripts))


def materialize(out_dir: str | Path, shape: str = "toy", seed: int = 7) -> Path:
    """Write the corpus as transcript files plus a manifest CSV; returns
    the manifest path."""
    out = Path(out_dir)
    tdir = out / "transcripts"
    tdir.mkdir(parents=True, exist_ok=True)
    corpus = build_corpus(shape, seed)
    manifest = out / "manifest.csv"
    with manifest.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "label", "split", "transcript_path"])
        for t in corpus.transcripts:
            fname = f"transcripts/{t.id}.txt"
            (out / fname).write_text(t.text + "\n", encoding="utf-8")
            writer.writerow([t.id, t.label.value, t.split.value, fname])
    return manifest


class MockTextGenerator:
    """Deterministic stand-in for an LLM generation endpoint: produces
    label-appropriate toy texts keyed off the requested conditioning.
    Useful both in tests and as the backing logic of a mock HTTP server."""

    def __init__(self, seed: int = 99):
        self.rng = np.random.default_rng(seed)

    def complete(self, messages: list[dict]) -> str:
        joined = " ".join(m.get("content", "") for m in messages).lower()
        wants_case = ("target label: case" in joined
                      or "cognitively impaired" in joined)
        if wants_case:
            return _disfluent_text(self.rng)
        return _fluent_text(self.rng)
