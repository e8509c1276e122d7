"""Classification evaluation: confusion metrics, ROC/AUC, PR, gains,
score profiles, prediction densities, and multi-seed aggregation.

Positive class is Case throughout. Zero-denominator precision, recall, F1
and PPV are defined as 0 so aggregation never sees NaN. AUC ties get half
credit (Mann-Whitney convention).
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

from .corpus import Label


class SingleClass(Exception):
    """Both classes are required for ranking metrics."""


class NoPositives(Exception):
    pass


@dataclass(frozen=True)
class ScoredPrediction:
    id: str
    true_label: Label
    p_case: float
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.p_case) and 0.0 <= self.p_case <= 1.0):
            raise ValueError(f"p_case must be in [0,1], got {self.p_case!r}")


@dataclass(frozen=True)
class CurveSeries:
    kind: str  # roc | pr | gains | ppv_profile | sensitivity_profile | density
    points: tuple[tuple[float, float], ...]
    summary: float | None = None
    group: str = ""  # e.g. class name for density curves
    note: str = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind, "points": [list(p) for p in self.points],
                "summary": self.summary, "group": self.group, "note": self.note}


def confusion_f1(preds: list[ScoredPrediction], threshold: float = 0.5) -> dict:
    if not preds:
        raise ValueError("confusion_f1 needs at least one prediction")
    tp = fp = tn = fn = 0
    for p in preds:
        predicted_case = p.p_case >= threshold
        if predicted_case and p.true_label is Label.CASE:
            tp += 1
        elif predicted_case:
            fp += 1
        elif p.true_label is Label.CASE:
            fn += 1
        else:
            tn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall else 0.0)
    return {"tp": tp, "fp": fp, "tn": tn, "fn": fn,
            "precision": precision, "recall": recall, "f1": f1}


def _split_scores(preds):
    pos = [p.p_case for p in preds if p.true_label is Label.CASE]
    neg = [p.p_case for p in preds if p.true_label is Label.CONTROL]
    return pos, neg


def roc_auc(preds: list[ScoredPrediction]) -> tuple[CurveSeries, float]:
    """ROC via threshold sweep over distinct scores; AUC by trapezoid.

    The trapezoid over grouped thresholds equals the Mann-Whitney pair
    statistic with ties counted 1/2.
    """
    pos, neg = _split_scores(preds)
    if not pos or not neg:
        raise SingleClass("ROC needs both classes present")
    thresholds = sorted({p.p_case for p in preds}, reverse=True)
    points = [(0.0, 0.0)]
    for th in thresholds:
        tpr = sum(1 for s in pos if s >= th) / len(pos)
        fpr = sum(1 for s in neg if s >= th) / len(neg)
        points.append((fpr, tpr))
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    auc = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        auc += (x1 - x0) * (y0 + y1) / 2.0
    return CurveSeries(kind="roc", points=tuple(points), summary=auc), auc


def pr_curve(preds: list[ScoredPrediction]) -> CurveSeries:
    pos, _ = _split_scores(preds)
    if not pos:
        raise NoPositives("PR curve needs at least one positive")
    n_pos = len(pos)
    points = []
    for th in sorted({p.p_case for p in preds}, reverse=True):
        taken = [p for p in preds if p.p_case >= th]
        tp = sum(1 for p in taken if p.true_label is Label.CASE)
        precision = tp / len(taken) if taken else 0.0
        recall = tp / n_pos
        points.append((recall, precision))
    if points[-1][0] != 1.0:  # all-taken endpoint always reaches recall 1
        points.append((1.0, n_pos / len(preds)))
    return CurveSeries(kind="pr", points=tuple(points))


def cumulative_gains(preds: list[ScoredPrediction]) -> CurveSeries:
    pos, _ = _split_scores(preds)
    if not pos:
        raise NoPositives("gains curve needs at least one positive")
    ranked = sorted(preds, key=lambda p: (-p.p_case, p.id))
    n, n_pos = len(ranked), len(pos)
    points = [(0.0, 0.0)]
    captured = 0
    for i, p in enumerate(ranked, start=1):
        if p.true_label is Label.CASE:
            captured += 1
        points.append((i / n, captured / n_pos))
    return CurveSeries(kind="gains", points=tuple(points))


def _percentile(sorted_vals: list[float], q: float) -> float:
    if len(sorted_vals) == 1:
        return sorted_vals[0]
    pos = (q / 100.0) * (len(sorted_vals) - 1)
    lo = int(pos)
    frac = pos - lo
    if lo + 1 < len(sorted_vals):
        return sorted_vals[lo] * (1 - frac) + sorted_vals[lo + 1] * frac
    return sorted_vals[lo]


def profile_at_threshold(preds: list[ScoredPrediction], threshold: float
                         ) -> tuple[float, float]:
    """(ppv, sensitivity) with predicted-positive = p_case >= threshold."""
    taken = [p for p in preds if p.p_case >= threshold]
    tp = sum(1 for p in taken if p.true_label is Label.CASE)
    n_pos = sum(1 for p in preds if p.true_label is Label.CASE)
    ppv = tp / len(taken) if taken else 0.0
    sens = tp / n_pos if n_pos else 0.0
    return ppv, sens


def score_profiles(preds: list[ScoredPrediction],
                   percentiles: list[float] | None = None
                   ) -> tuple[CurveSeries, CurveSeries]:
    """PPV and sensitivity at score-percentile thresholds."""
    pos, neg = _split_scores(preds)
    if not pos or not neg:
        raise SingleClass("score profiles need both classes present")
    if percentiles is None:
        percentiles = [float(q) for q in range(0, 101, 5)]
    scores = sorted(p.p_case for p in preds)
    ppv_pts, sens_pts = [], []
    for q in percentiles:
        th = _percentile(scores, q)
        ppv, sens = profile_at_threshold(preds, th)
        ppv_pts.append((q, ppv))
        sens_pts.append((q, sens))
    return (CurveSeries(kind="ppv_profile", points=tuple(ppv_pts)),
            CurveSeries(kind="sensitivity_profile", points=tuple(sens_pts)))


def density(preds: list[ScoredPrediction], bins: int = 20
            ) -> dict[str, CurveSeries]:
    """Per-class normalized histograms of p_case over [0,1].

    Points are (bin_center, mass); masses sum to 1 per non-empty class.
    An empty class yields an empty, flagged series.
    """
    out = {}
    for label in Label:
        scores = [p.p_case for p in preds if p.true_label is label]
        if not scores:
            out[label.value] = CurveSeries(
                kind="density", points=(), group=label.value,
                note="empty class")
            continue
        counts = [0] * bins
        for s in scores:
            idx = min(int(s * bins), bins - 1)
            counts[idx] += 1
        pts = tuple(((i + 0.5) / bins, c / len(scores))
                    for i, c in enumerate(counts))
        out[label.value] = CurveSeries(kind="density", points=pts,
                                       group=label.value)
    return out


def aggregate_seeds(per_seed: list[dict[str, float]]) -> dict[str, dict]:
    """mean +- sample std (n-1; 0 when n = 1) per metric key."""
    if not per_seed:
        raise ValueError("aggregate_seeds needs at least one seed")
    keys = set(per_seed[0])
    for i, d in enumerate(per_seed[1:], start=1):
        if set(d) != keys:
            raise ValueError(
                f"seed {i} metric keys {sorted(d)} differ from {sorted(keys)}")
    out = {}
    for k in sorted(keys):
        vals = [d[k] for d in per_seed]
        std = statistics.stdev(vals) if len(vals) > 1 else 0.0
        out[k] = {"mean": statistics.fmean(vals), "std": std}
    return out
