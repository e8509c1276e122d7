"""Feature extraction and train-split standardization."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass

import numpy as np

from ..corpus import Transcript
from .tokenize import tokenize
from .tagger import TaggerModel, pos_tag
from .lexicon import CategoryLexicon
from .registry import FeatureContext, feature_registry

log = logging.getLogger(__name__)


def extract_features(transcript: Transcript, lexicon: CategoryLexicon,
                     tagger: TaggerModel) -> np.ndarray:
    """All 110 registry features for one transcript, in registry order.

    Every value is finite; degenerate denominators yield 0 (logged once per
    transcript at debug level).
    """
    stream = tokenize(transcript.text)
    tags = pos_tag(stream, tagger)
    ctx = FeatureContext(stream, tags, lexicon)
    values = np.empty(110, dtype=np.float64)
    degenerate = []
    for i, feat in enumerate(feature_registry()):
        v = feat.compute(ctx)
        if not math.isfinite(v):
            raise AssertionError(
                f"feature {feat.name} produced non-finite value {v!r} "
                f"for transcript {transcript.id!r}")
        if v == 0.0 and feat.kind in ("ratio", "ttr"):
            degenerate.append(feat.name)
        values[i] = v
    if degenerate and ctx.n == 0:
        log.debug("transcript %s: no word tokens, %d features degenerate to 0",
                  transcript.id, len(degenerate))
    return values


@dataclass(frozen=True)
class Standardization:
    """Per-column z-score parameters fit on the training split.

    Population std (ddof=0); zero-variance columns standardize to 0.
    """
    mean: np.ndarray
    std: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        safe = np.where(self.std == 0.0, 1.0, self.std)
        Z = (X - self.mean) / safe
        Z[:, self.std == 0.0] = 0.0
        return Z

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardization":
        return cls(mean=np.asarray(d["mean"], dtype=np.float64),
                   std=np.asarray(d["std"], dtype=np.float64))


def feature_matrix(transcripts: list[Transcript], lexicon: CategoryLexicon,
                   tagger: TaggerModel,
                   standardization: Standardization | None = None,
                   ) -> tuple[np.ndarray, Standardization]:
    """Stack feature vectors into an (n x 110) matrix and z-score it.

    With `standardization=None` the parameters are fit on these rows (the
    training split); pass the fitted parameters back in for validation and
    test rows so no statistics leak across splits.
    """
    if not transcripts:
        raise ValueError("feature_matrix needs at least one transcript")
    X = np.stack([extract_features(t, lexicon, tagger) for t in transcripts])
    if standardization is None:
        standardization = Standardization(
            mean=X.mean(axis=0), std=X.std(axis=0, ddof=0))
    return standardization.apply(X), standardization


def features_to_csv(ids: list[str], X: np.ndarray) -> str:
    """CSV text with an id column plus the 110 registry-named columns.

    Floats use repr (shortest round-trip), so output is bit-reproducible.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id"] + [f.name for f in feature_registry()])
    for tid, row in zip(ids, X):
        writer.writerow([tid] + [repr(float(v)) for v in row])
    return buf.getvalue()
