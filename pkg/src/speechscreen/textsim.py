"""Synthetic-text quality metrics: corpus BLEU-1..4, BERTScore over token
embeddings, an exact t-SNE, and 2-D overlap statistics.

BLEU is reported per n (clipped modified precision times the brevity
penalty) because the evaluation tracks BLEU-1 through BLEU-4 separately;
the geometric-mean composite is also emitted. Exact O(n^2) t-SNE only —
inputs here are at most a few hundred points.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np


# ----------------------------------------------------------------- BLEU --

@dataclass(frozen=True)
class BleuReport:
    scores: dict[int, float]        # n -> BP * clipped precision_n
    precisions: dict[int, float]    # n -> clipped precision_n
    brevity_penalty: float
    candidate_length: int
    reference_length: int
    geometric_mean: float           # classic composite over n = 1..4


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidates: list[list[str]],
         references: list[list[list[str]]],
         max_n: int = 4) -> BleuReport:
    """Corpus-level BLEU with n-gram clipping.

    `references[i]` is the list of reference token lists for candidate i.
    Clipping caps each candidate n-gram count at the maximum count seen in
    any single reference. BP = exp(1 - r/c) for c < r else 1, with r the
    closest reference length per candidate (ties -> shorter), summed.
    """
    if not candidates:
        raise ValueError("bleu needs at least one candidate")
    if len(references) != len(candidates):
        raise ValueError("references must align with candidates")
    if not 1 <= max_n <= 4:
        raise ValueError("max_n must be in 1..4")

    clipped = Counter()
    total = Counter()
    c_len = 0
    r_len = 0
    for cand, refs in zip(candidates, references):
        if not refs:
            raise ValueError("every candidate needs at least one reference")
        c_len += len(cand)
        r_len += min((len(r) for r in refs),
                     key=lambda L: (abs(L - len(cand)), L))
        for n in range(1, max_n + 1):
            counts = _ngrams(cand, n)
            if not counts:
                continue
            max_ref = Counter()
            for ref in refs:
                for gram, cnt in _ngrams(ref, n).items():
                    if cnt > max_ref[gram]:
                        max_ref[gram] = cnt
            for gram, cnt in counts.items():
                clipped[n] += min(cnt, max_ref[gram])
                total[n] += cnt

    bp = 1.0 if c_len >= r_len else math.exp(1.0 - r_len / max(c_len, 1))
    precisions = {n: (clipped[n] / total[n] if total[n] else 0.0)
                  for n in range(1, max_n + 1)}
    scores = {n: bp * p for n, p in precisions.items()}
    if all(precisions[n] > 0 for n in range(1, max_n + 1)):
        gm = bp * math.exp(sum(math.log(precisions[n])
                               for n in range(1, max_n + 1)) / max_n)
    else:
        gm = 0.0
    return BleuReport(scores=scores, precisions=precisions, brevity_penalty=bp,
                      candidate_length=c_len, reference_length=r_len,
                      geometric_mean=gm)


# ------------------------------------------------------------ BERTScore --

@dataclass(frozen=True)
class BertScoreReport:
    precision: float
    recall: float
    f1: float


def bertscore(cand_matrix: np.ndarray, ref_matrix: np.ndarray,
              cand_idf: np.ndarray | None = None,
              ref_idf: np.ndarray | None = None) -> BertScoreReport:
    """Greedy max-cosine token matching.

    P averages, over candidate tokens, the best cosine against any
    reference token; R is symmetric over reference tokens; F1 is their
    harmonic mean. Optional idf arrays turn the means into weighted means.
    Cosines are unrescaled, so values live in [-1, 1].
    """
    C = np.asarray(cand_matrix, dtype=np.float64)
    R = np.asarray(ref_matrix, dtype=np.float64)
    if C.ndim != 2 or R.ndim != 2 or C.shape[0] == 0 or R.shape[0] == 0:
        raise ValueError("candidate and reference matrices must be non-empty 2-D")
    if C.shape[1] != R.shape[1]:
        raise ValueError(f"dim mismatch: {C.shape[1]} vs {R.shape[1]}")
    cn = np.linalg.norm(C, axis=1)
    rn = np.linalg.norm(R, axis=1)
    if np.any(cn == 0) or np.any(rn == 0):
        raise ValueError("zero-norm token vector")
    sim = (C / cn[:, None]) @ (R / rn[:, None]).T
    p_scores = sim.max(axis=1)
    r_scores = sim.max(axis=0)

    def wmean(scores, weights):
        if weights is None:
            return float(scores.mean())
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != scores.shape or w.sum() <= 0:
            raise ValueError("idf weights must align with tokens and sum > 0")
        return float((scores * w).sum() / w.sum())

    p = wmean(p_scores, cand_idf)
    r = wmean(r_scores, ref_idf)
    f1 = 2 * p * r / (p + r) if (p + r) > 0 else 0.0
    return BertScoreReport(precision=p, recall=r, f1=f1)


# ---------------------------------------------------------------- t-SNE --

@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 30.0
    iterations: int = 1000
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    learning_rate: float = 200.0
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    seed: int = 0


@dataclass(frozen=True)
class TsneResult:
    coordinates: np.ndarray  # (n, 2)
    kl_divergence: float
    kl_trace: tuple[tuple[int, float], ...]  # (iteration, KL) every 50 iters


def _binary_search_sigmas(sq_dists: np.ndarray, perplexity: float,
                          tol: float = 1e-5, max_steps: int = 100):
    """Per-point Gaussian precisions matched to log(perplexity) within tol."""
    n = sq_dists.shape[0]
    target = math.log(perplexity)
    P = np.zeros((n, n))
    betas = np.ones(n)
    for i in range(n):
        beta, lo, hi = 1.0, 0.0, math.inf
        d = np.delete(sq_dists[i], i)
        for _ in range(max_steps):
            w = np.exp(-d * beta)
            s = w.sum()
            if s <= 0:
                entropy = 0.0
                probs = np.zeros_like(w)
            else:
                probs = w / s
                entropy = math.log(s) + beta * float((d * probs).sum())
            if abs(entropy - target) < tol:
                break
            if entropy > target:   # too spread out: raise precision
                lo = beta
                beta = beta * 2.0 if hi is math.inf else (beta + hi) / 2.0
            else:
                hi = beta
                beta = beta / 2.0 if lo == 0.0 else (beta + lo) / 2.0
        betas[i] = beta
        row = np.insert(probs, i, 0.0)
        P[i] = row
    return P, betas


def tsne(X: np.ndarray, cfg: TsneConfig = TsneConfig()) -> TsneResult:
    """Exact t-SNE to 2-D with early exaggeration and momentum + gains.

    Squared distances are rounded to 8 significant digits before the
    bandwidth search: the embedding then depends on the geometry of the
    input, not on representation noise (a rigidly rotated input yields
    the same trajectory). All-identical inputs get a tiny seeded jitter
    so the bandwidth search stays well-defined.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < 3:
        raise ValueError("t-SNE needs at least 3 points")
    if not cfg.perplexity < n:
        raise ValueError(f"perplexity {cfg.perplexity} must be < n = {n}")

    rng = np.random.default_rng(cfg.seed)
    sq = _round_sig(_sq_dists(X))
    if np.all(sq[~np.eye(n, dtype=bool)] < 1e-24):
        X = X + rng.normal(scale=1e-8, size=X.shape)
        sq = _round_sig(_sq_dists(X))

    cond_P, _ = _binary_search_sigmas(sq, cfg.perplexity)
    P = (cond_P + cond_P.T) / (2.0 * n)
    P = np.maximum(P, 1e-12)

    Y = rng.normal(scale=1e-4, size=(n, 2))
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    kl_trace: list[tuple[int, float]] = []

    def q_of(Y_):
        w = 1.0 / (1.0 + _sq_dists(Y_))
        np.fill_diagonal(w, 0.0)
        return w, np.maximum(w / w.sum(), 1e-12)

    def kl_of(Q_):
        return float((P * np.log(P / Q_)).sum())

    w, Q = q_of(Y)
    kl = kl_of(Q)
    for it in range(cfg.iterations):
        exaggerating = it < cfg.exaggeration_iters
        P_run = P * cfg.early_exaggeration if exaggerating else P
        PQ = (P_run - Q) * w
        grad = 4.0 * ((np.diag(PQ.sum(axis=1)) - PQ) @ Y)

        momentum = cfg.momentum_early if exaggerating else cfg.momentum_late
        inc = (update * grad) < 0.0
        gains[inc] += 0.2
        gains[~inc] *= 0.8
        np.clip(gains, 0.01, None, out=gains)
        update = momentum * update - cfg.learning_rate * (gains * grad)
        Y_cand = Y + update
        Y_cand = Y_cand - Y_cand.mean(axis=0)
        w_cand, Q_cand = q_of(Y_cand)
        kl_cand = kl_of(Q_cand)
        if exaggerating or kl_cand <= kl:
            # plain momentum step; past the exaggeration phase it is only
            # taken when it does not raise KL, so the trace is monotone
            Y, w, Q, kl = Y_cand, w_cand, Q_cand, kl_cand
        else:
            update *= 0.5
            gains *= 0.5
            np.clip(gains, 0.01, None, out=gains)

        if (it + 1) % 50 == 0 or it == cfg.iterations - 1:
            kl_trace.append((it + 1, kl))

    return TsneResult(coordinates=Y, kl_divergence=kl,
                      kl_trace=tuple(kl_trace))


def _sq_dists(X: np.ndarray) -> np.ndarray:
    s = (X * X).sum(axis=1)
    d2 = s[:, None] + s[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def _round_sig(a: np.ndarray, digits: int = 8) -> np.ndarray:
    out = a.copy()
    nz = out > 0
    mag = np.floor(np.log10(out[nz]))
    factor = np.power(10.0, digits - 1 - mag)
    out[nz] = np.round(out[nz] * factor) / factor
    return out


# -------------------------------------------------------------- overlap --

def overlap_report(groups: dict[str, np.ndarray], k: int = 10) -> dict:
    """Centroid distances per group pair and a k-NN mixing score.

    Mixing = fraction of each point's k nearest neighbors (ties broken by
    global index) that belong to a different group; 0 means fully
    separated, roughly the other-groups size share means fully mixed.
    k is clamped when a group is smaller than k.
    """
    if len(groups) < 2:
        raise ValueError("overlap_report needs at least 2 groups")
    names = sorted(groups)
    pts = np.vstack([np.asarray(groups[g], dtype=np.float64) for g in names])
    owner = np.concatenate([np.full(len(groups[g]), gi)
                            for gi, g in enumerate(names)])
    n = len(pts)
    k_eff = min(k, min(len(groups[g]) for g in names), n - 1)

    centroids = {g: np.asarray(groups[g]).mean(axis=0) for g in names}
    pair_dist = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            pair_dist[f"{a}|{b}"] = float(
                np.linalg.norm(centroids[a] - centroids[b]))

    d2 = _sq_dists(pts)
    np.fill_diagonal(d2, np.inf)
    mixing_per_group = {g: [] for g in names}
    for i in range(n):
        nbrs = np.lexsort((np.arange(n), d2[i]))[:k_eff]
        frac = float((owner[nbrs] != owner[i]).mean())
        mixing_per_group[names[int(owner[i])]].append(frac)
    per_group = {g: (sum(v) / len(v) if v else 0.0)
                 for g, v in mixing_per_group.items()}
    overall = float(np.mean([f for v in mixing_per_group.values() for f in v]))
    return {"k": k_eff, "centroid_distances": pair_dist,
            "mixing_per_group": per_group, "mixing_overall": overall}
