"""Small-network machinery built on numpy: two-layer MLP heads, AdamW,
inverted dropout, a gated late-fusion classifier, the multi-seed
training/selection protocol, and portable checkpoints.

Conventions (documented once, used everywhere):
  * logits index 0 = Case, index 1 = Control; p_case = softmax(logits)[0]
  * hard prediction = Case iff the Case logit is strictly greater
    (tie logits -> Control); evaluation feeds clsmetrics hard 0/1 scores
    so both modules count the same confusion matrix
  * "two-layer MLP" = input -> hidden (ReLU, dropout) -> 2 logits
  * weight init: uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)), seeded
  * checkpoint parameters are float32; forward math is float64 on the
    float32 values, so save -> load -> predict is bit-stable
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Label
from .clsmetrics import ScoredPrediction, confusion_f1, roc_auc, SingleClass

CHECKPOINT_FORMAT = "mlp-checkpoint/1"

CASE_INDEX = 0
CONTROL_INDEX = 1


class TrainingDiverged(Exception):
    """Loss became non-finite; carries seed/epoch/batch diagnostics."""


@dataclass
class MlpParams:
    W1: np.ndarray  # (h, d)
    b1: np.ndarray  # (h,)
    W2: np.ndarray  # (2, h)
    b2: np.ndarray  # (2,)
    dropout_rate: float = 0.0

    @property
    def input_dim(self) -> int:
        return self.W1.shape[1]

    @property
    def hidden_size(self) -> int:
        return self.W1.shape[0]

    def flat(self, prefix: str = "") -> dict[str, np.ndarray]:
        return {prefix + "W1": self.W1, prefix + "b1": self.b1,
                prefix + "W2": self.W2, prefix + "b2": self.b2}

    def copy(self) -> "MlpParams":
        return MlpParams(self.W1.copy(), self.b1.copy(), self.W2.copy(),
                         self.b2.copy(), self.dropout_rate)


@dataclass
class FusionParams:
    emb: MlpParams
    ling: MlpParams
    gate: np.ndarray  # scalar array; alpha = sigmoid(gate)

    def flat(self) -> dict[str, np.ndarray]:
        out = self.emb.flat("emb.")
        out.update(self.ling.flat("ling."))
        out["gate"] = self.gate
        return out

    def copy(self) -> "FusionParams":
        return FusionParams(self.emb.copy(), self.ling.copy(), self.gate.copy())


def init_mlp(input_dim: int, hidden: int, dropout_rate: float,
             rng: np.random.Generator) -> MlpParams:
    def u(fan_in, shape):
        bound = 1.0 / math.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    return MlpParams(
        W1=u(input_dim, (hidden, input_dim)),
        b1=u(input_dim, (hidden,)),
        W2=u(hidden, (2, hidden)),
        b2=u(hidden, (2,)),
        dropout_rate=dropout_rate,
    )


def init_fusion(emb_dim: int, ling_dim: int, emb_hidden: int = 256,
                ling_hidden: int = 128, emb_dropout: float = 0.4,
                ling_dropout: float = 0.0,
                rng: np.random.Generator | None = None) -> FusionParams:
    rng = rng if rng is not None else np.random.default_rng(0)
    return FusionParams(
        emb=init_mlp(emb_dim, emb_hidden, emb_dropout, rng),
        ling=init_mlp(ling_dim, ling_hidden, ling_dropout, rng),
        gate=np.zeros(()),
    )


# ------------------------------------------------------------ forward ----

def mlp_forward(params: MlpParams, X: np.ndarray, mode: str = "eval",
                rng: np.random.Generator | None = None):
    """Logits (B, 2) plus the cache needed for backward.

    Train mode applies inverted dropout to the hidden activations; eval
    mode is deterministic and dropout-free.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != params.input_dim:
        raise ValueError(f"input dim {X.shape[1]} != {params.input_dim}")
    z1 = X @ params.W1.T + params.b1
    a = np.maximum(z1, 0.0)
    p = params.dropout_rate
    if mode == "train" and p > 0.0:
        if rng is None:
            raise ValueError("train mode with dropout needs an rng")
        mask = (rng.random(a.shape) >= p) / (1.0 - p)
        a = a * mask
    else:
        mask = None
    logits = a @ params.W2.T + params.b2
    cache = {"X": X, "z1": z1, "a": a, "mask": mask}
    return logits, cache


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def onehot(labels: list[Label]) -> np.ndarray:
    out = np.zeros((len(labels), 2))
    for i, l in enumerate(labels):
        out[i, CASE_INDEX if l is Label.CASE else CONTROL_INDEX] = 1.0
    return out


def xent_loss_and_dlogits(logits: np.ndarray, targets: np.ndarray):
    """Mean softmax cross-entropy and its gradient wrt the logits."""
    probs = softmax(logits)
    B = logits.shape[0]
    eps = 1e-300  # guards log(0); softmax of finite logits never hits it
    loss = -np.sum(targets * np.log(probs + eps)) / B
    return loss, (probs - targets) / B


def mlp_backward(params: MlpParams, cache: dict, dlogits: np.ndarray
                 ) -> dict[str, np.ndarray]:
    """Exact gradients of the (already-averaged) loss wrt every parameter."""
    a, z1, X, mask = cache["a"], cache["z1"], cache["X"], cache["mask"]
    dW2 = dlogits.T @ a
    db2 = dlogits.sum(axis=0)
    da = dlogits @ params.W2
    if mask is not None:
        da = da * mask
    dz1 = da * (z1 > 0.0)
    dW1 = dz1.T @ X
    db1 = dz1.sum(axis=0)
    return {"W1": dW1, "b1": db1, "W2": dW2, "b2": db2}


def backward(params: MlpParams, cache: dict, logits: np.ndarray,
             labels: list[Label]):
    """Convenience wrapper: loss plus gradients for a labeled batch."""
    loss, dlogits = xent_loss_and_dlogits(logits, onehot(labels))
    return loss, mlp_backward(params, cache, dlogits)


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def fuse_forward(fp: FusionParams, X_emb: np.ndarray, X_ling: np.ndarray,
                 mode: str = "eval", rng: np.random.Generator | None = None):
    """logits = alpha * z_emb + (1 - alpha) * z_ling, alpha = sigmoid(gate)."""
    z_emb, cache_e = mlp_forward(fp.emb, X_emb, mode, rng)
    z_ling, cache_l = mlp_forward(fp.ling, X_ling, mode, rng)
    alpha = _sigmoid(float(fp.gate))
    logits = alpha * z_emb + (1.0 - alpha) * z_ling
    cache = {"emb": cache_e, "ling": cache_l, "z_emb": z_emb,
             "z_ling": z_ling, "alpha": alpha}
    return logits, cache


def fuse_backward(fp: FusionParams, cache: dict, dlogits: np.ndarray
                  ) -> dict[str, np.ndarray]:
    alpha = cache["alpha"]
    d_emb = mlp_backward(fp.emb, cache["emb"], dlogits * alpha)
    d_ling = mlp_backward(fp.ling, cache["ling"], dlogits * (1.0 - alpha))
    dalpha = float(np.sum(dlogits * (cache["z_emb"] - cache["z_ling"])))
    dgate = dalpha * alpha * (1.0 - alpha)
    grads = {f"emb.{k}": v for k, v in d_emb.items()}
    grads.update({f"ling.{k}": v for k, v in d_ling.items()})
    grads["gate"] = np.asarray(dgate)
    return grads


# -------------------------------------------------------------- AdamW ----

@dataclass
class AdamWState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int
    lr: float
    weight_decay: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def init(cls, params: dict[str, np.ndarray], lr: float,
             weight_decay: float, **kw) -> "AdamWState":
        return cls(m={k: np.zeros_like(p) for k, p in params.items()},
                   v={k: np.zeros_like(p) for k, p in params.items()},
                   t=0, lr=lr, weight_decay=weight_decay, **kw)


def adamw_step(state: AdamWState, params: dict[str, np.ndarray],
               grads: dict[str, np.ndarray]):
    """In-place decoupled-weight-decay Adam update:
    p <- p - lr * (m_hat / (sqrt(v_hat) + eps) + wd * p)."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** state.t
    bc2 = 1.0 - b2 ** state.t
    for k, p in params.items():
        g = grads[k]
        state.m[k] = b1 * state.m[k] + (1 - b1) * g
        state.v[k] = b2 * state.v[k] + (1 - b2) * g * g
        m_hat = state.m[k] / bc1
        v_hat = state.v[k] / bc2
        p -= state.lr * (m_hat / (np.sqrt(v_hat) + state.eps)
                         + state.weight_decay * p)
    return params, state


# ----------------------------------------------------------- training ----

@dataclass(frozen=True)
class TrainConfig:
    lr: float
    weight_decay: float
    epochs: int = 50
    batch_size: int = 8
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    hidden: int = 256          # single-branch models
    dropout: float = 0.0
    emb_hidden: int = 256      # fusion branches
    ling_hidden: int = 128
    emb_dropout: float = 0.4
    ling_dropout: float = 0.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")

    def to_dict(self) -> dict:
        return {"lr": self.lr, "weight_decay": self.weight_decay,
                "epochs": self.epochs, "batch_size": self.batch_size,
                "seeds": list(self.seeds), "hidden": self.hidden,
                "dropout": self.dropout, "emb_hidden": self.emb_hidden,
                "ling_hidden": self.ling_hidden,
                "emb_dropout": self.emb_dropout,
                "ling_dropout": self.ling_dropout}


@dataclass(frozen=True)
class SplitData:
    """One split's inputs: ids, labels, and either a single feature matrix
    or the (embedding, linguistic) pair for fusion."""
    ids: tuple[str, ...]
    labels: tuple[Label, ...]
    X: np.ndarray | None = None
    X_emb: np.ndarray | None = None
    X_ling: np.ndarray | None = None

    def __len__(self):
        return len(self.ids)


def _forward_any(model, batch_X, mode, rng):
    if isinstance(model, FusionParams):
        return fuse_forward(model, batch_X[0], batch_X[1], mode, rng)
    return mlp_forward(model, batch_X, mode, rng)


def _backward_any(model, cache, dlogits):
    if isinstance(model, FusionParams):
        return fuse_backward(model, cache, dlogits)
    return mlp_backward(model, cache, dlogits)


def _take(data: SplitData, idx):
    if data.X is not None:
        return data.X[idx]
    return (data.X_emb[idx], data.X_ling[idx])


def hard_labels(logits: np.ndarray) -> list[Label]:
    """Case iff the Case logit strictly exceeds Control (ties -> Control)."""
    return [Label.CASE if row[CASE_INDEX] > row[CONTROL_INDEX] else Label.CONTROL
            for row in logits]


def _eval_f1(model, data: SplitData) -> float:
    logits, _ = _forward_any(model, _take(data, slice(None)), "eval", None)
    preds = [ScoredPrediction(id=i, true_label=t,
                              p_case=1.0 if h is Label.CASE else 0.0)
             for i, t, h in zip(data.ids, data.labels, hard_labels(logits))]
    return confusion_f1(preds)["f1"]


@dataclass
class Checkpoint:
    kind: str                       # embedding | linguistic | fusion
    seed: int
    best_epoch: int
    val_f1: float
    config: dict
    shapes: dict[str, list[int]]
    payload: dict[str, np.ndarray]  # float32 parameter arrays
    dropout_rates: dict[str, float]
    standardization_ref: str = ""

    def model(self):
        """Rebuild params (float64 math on float32 values)."""
        p = {k: v.astype(np.float64) for k, v in self.payload.items()}
        if self.kind == "fusion":
            emb = MlpParams(p["emb.W1"], p["emb.b1"], p["emb.W2"], p["emb.b2"],
                            self.dropout_rates.get("emb", 0.0))
            ling = MlpParams(p["ling.W1"], p["ling.b1"], p["ling.W2"],
                             p["ling.b2"], self.dropout_rates.get("ling", 0.0))
            return FusionParams(emb=emb, ling=ling, gate=p["gate"])
        return MlpParams(p["W1"], p["b1"], p["W2"], p["b2"],
                         self.dropout_rates.get("main", 0.0))

    def save(self, path: str | Path) -> None:
        order = sorted(self.payload)
        blob = b"".join(
            np.ascontiguousarray(self.payload[k], dtype="<f4").tobytes()
            for k in order)
        doc = {
            "format": CHECKPOINT_FORMAT,
            "kind": self.kind,
            "seed": self.seed,
            "best_epoch": self.best_epoch,
            "val_f1": self.val_f1,
            "config": self.config,
            "shapes": {k: list(self.payload[k].shape) for k in order},
            "dropout_rates": self.dropout_rates,
            "standardization_ref": self.standardization_ref,
            "dtype": "float32-le",
            "payload_b64": base64.b64encode(blob).decode("ascii"),
        }
        Path(path).write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if doc.get("format") != CHECKPOINT_FORMAT:
            raise ValueError(f"unsupported checkpoint format {doc.get('format')!r}")
        blob = base64.b64decode(doc["payload_b64"])
        payload = {}
        offset = 0
        for k in sorted(doc["shapes"]):
            shape = tuple(doc["shapes"][k])
            count = int(np.prod(shape)) if shape else 1
            arr = np.frombuffer(blob, dtype="<f4", count=count, offset=offset)
            payload[k] = arr.reshape(shape).copy()
            offset += count * 4
        return cls(kind=doc["kind"], seed=doc["seed"],
                   best_epoch=doc["best_epoch"], val_f1=doc["val_f1"],
                   config=doc["config"], shapes=doc["shapes"],
                   payload=payload, dropout_rates=doc["dropout_rates"],
                   standardization_ref=doc.get("standardization_ref", ""))


def _capture(kind: str, model, seed: int, epoch: int, val_f1: float,
             cfg: TrainConfig) -> Checkpoint:
    if isinstance(model, FusionParams):
        payload = {k: v.astype(np.float32) for k, v in model.flat().items()}
        rates = {"emb": model.emb.dropout_rate, "ling": model.ling.dropout_rate}
    else:
        payload = {k: v.astype(np.float32) for k, v in model.flat().items()}
        rates = {"main": model.dropout_rate}
    return Checkpoint(kind=kind, seed=seed, best_epoch=epoch, val_f1=val_f1,
                      config=cfg.to_dict(),
                      shapes={k: list(v.shape) for k, v in payload.items()},
                      payload=payload, dropout_rates=rates)


def predict_proba(checkpoint_or_model, x, x_ling=None) -> np.ndarray:
    """Probability of Case per row (softmax over the 2 logits)."""
    model = (checkpoint_or_model.model()
             if isinstance(checkpoint_or_model, Checkpoint)
             else checkpoint_or_model)
    if isinstance(model, FusionParams):
        logits, _ = fuse_forward(model, x, x_ling, "eval", None)
    else:
        logits, _ = mlp_forward(model, x, "eval", None)
    return softmax(logits)[:, CASE_INDEX]


def train(model_kind: str, train_data: SplitData, val_data: SplitData,
          test_data: SplitData | None, cfg: TrainConfig
          ) -> tuple[list[Checkpoint], dict]:
    """The multi-seed protocol: per seed, seeded init and shuffling, fixed
    epoch budget, checkpoint at the max-validation-F1 epoch (ties ->
    earliest), then test metrics from the captured checkpoint. The report
    aggregates mean +- std across seeds; curves pool all seeds' test
    predictions.
    """
    if model_kind not in ("embedding", "linguistic", "fusion"):
        raise ValueError(f"unknown model kind {model_kind!r}")
    if len(train_data) == 0 or len(val_data) == 0:
        raise ValueError("train and validation splits must be non-empty")

    checkpoints: list[Checkpoint] = []
    per_seed_metrics: list[dict[str, float]] = []
    pooled: list[ScoredPrediction] = []

    for seed in cfg.seeds:
        rng = np.random.default_rng(seed)
        if model_kind == "fusion":
            model = init_fusion(train_data.X_emb.shape[1],
                                train_data.X_ling.shape[1],
                                cfg.emb_hidden, cfg.ling_hidden,
                                cfg.emb_dropout, cfg.ling_dropout, rng)
        else:
            model = init_mlp(train_data.X.shape[1], cfg.hidden, cfg.dropout, rng)
        params = model.flat()
        opt = AdamWState.init(params, lr=cfg.lr, weight_decay=cfg.weight_decay)

        best = (-1.0, -1, None)  # (val_f1, epoch, checkpoint)
        n = len(train_data)
        for epoch in range(cfg.epochs):
            order = rng.permutation(n)
            for start in range(0, n, cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                bx = _take(train_data, idx)
                by = [train_data.labels[i] for i in idx]
                logits, cache = _forward_any(model, bx, "train", rng)
                loss, dlogits = xent_loss_and_dlogits(logits, onehot(by))
                if not math.isfinite(loss):
                    raise TrainingDiverged(
                        f"seed {seed}: non-finite loss at epoch {epoch}, "
                        f"batch offset {start}")
                grads = _backward_any(model, cache, dlogits)
                adamw_step(opt, params, grads)
            val_f1 = _eval_f1(model, val_data)
            if val_f1 > best[0]:
                best = (val_f1, epoch,
                        _capture(model_kind, model, seed, epoch, val_f1, cfg))
        ckpt = best[2]
        checkpoints.append(ckpt)

        if test_data is not None and len(test_data) > 0:
            frozen = ckpt.model()
            logits, _ = _forward_any(frozen, _take(test_data, slice(None)),
                                     "eval", None)
            probs = softmax(logits)[:, CASE_INDEX]
            hard = hard_labels(logits)
            hard_preds = [ScoredPrediction(id=i, true_label=t,
                                           p_case=1.0 if h is Label.CASE else 0.0,
                                           seed=seed)
                          for i, t, h in zip(test_data.ids, test_data.labels, hard)]
            soft_preds = [ScoredPrediction(id=i, true_label=t,
                                           p_case=float(p), seed=seed)
                          for i, t, p in zip(test_data.ids, test_data.labels, probs)]
            cm = confusion_f1(hard_preds)
            try:
                _, auc = roc_auc(soft_preds)
            except SingleClass:
                auc = float("nan")
            per_seed_metrics.append({"f1": cm["f1"],
                                     "precision": cm["precision"],
                                     "recall": cm["recall"], "auc": auc,
                                     "val_f1": ckpt.val_f1})
            pooled.extend(soft_preds)

    report = {"model_kind": model_kind, "dataset": "test",
              "config": cfg.to_dict(), "per_seed": per_seed_metrics}
    if per_seed_metrics:
        from .clsmetrics import aggregate_seeds, pr_curve, cumulative_gains, \
            score_profiles, density
        report["aggregate"] = aggregate_seeds(per_seed_metrics)
        roc_series, _ = roc_auc(pooled)
        ppv, sens = score_profiles(pooled)
        dens = density(pooled)
        report["curves"] = ([roc_series.to_dict(), pr_curve(pooled).to_dict(),
                             cumulative_gains(pooled).to_dict(),
                             ppv.to_dict(), sens.to_dict()]
                            + [d.to_dict() for d in dens.values()])
    return checkpoints, report
