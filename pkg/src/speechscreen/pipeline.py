"""Glue between config, corpus, features, embeddings, and training.

Everything here is pure file-in/file-out orchestration so the CLI stays
thin and tests can drive stages directly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .config import PipelineConfig, ConfigError
from .corpus import Corpus, Split, Transcript, load_manifest
from .embeddings import (EmbeddingStore, HASH_PROVIDER, hash_embedding,
                         load_store)
from .lingfeat import feature_matrix, load_lexicon, load_tagger
from .neuralnet import SplitData, TrainConfig, train


def load_inputs(cfg: PipelineConfig):
    manifest = cfg["paths.manifest"]
    if not manifest:
        raise ConfigError("paths.manifest is required")
    corpus = load_manifest(manifest)
    lexicon = load_lexicon(cfg["paths.lexicon"])
    tagger = load_tagger(cfg["paths.tagger_model"])
    return corpus, lexicon, tagger


def embedding_rows(cfg: PipelineConfig, transcripts: list[Transcript],
                   store: EmbeddingStore | None = None) -> np.ndarray:
    """Sentence embeddings for transcripts, id-keyed from the store or
    computed by the hashed-BoW provider."""
    provider = cfg["embedding.provider"]
    if provider == HASH_PROVIDER:
        dim = cfg["embedding.dim"]
        return np.stack([hash_embedding(t.text, dim) for t in transcripts])
    if store is None:
        path = cfg["paths.embedding_store"]
        if not path:
            raise ConfigError(
                f"embedding provider {provider!r} needs paths.embedding_store")
        store = load_store(path)
    return np.stack([store.get(provider, t.id).sentence_array()
                     for t in transcripts])


def _split_data(view: list[Transcript], model_kind: str,
                X: np.ndarray | None = None,
                X_emb: np.ndarray | None = None,
                X_ling: np.ndarray | None = None) -> SplitData:
    return SplitData(ids=tuple(t.id for t in view),
                     labels=tuple(t.label for t in view),
                     X=X, X_emb=X_emb, X_ling=X_ling)


def build_model_data(cfg: PipelineConfig, corpus: Corpus, model_kind: str,
                     lexicon, tagger,
                     extra_train: list[Transcript] | None = None,
                     store: EmbeddingStore | None = None):
    """SplitData triples for one model kind.

    `extra_train` (synthetic samples) joins only the training view; the
    feature standardization is fit on that merged training view and reused
    downstream, and validation/test stay purely real.
    """
    train_view = corpus.view(Split.TRAIN) + list(extra_train or [])
    val_view = corpus.view(Split.VALIDATION)
    test_view = corpus.view(Split.TEST)

    need_ling = model_kind in ("linguistic", "fusion")
    need_emb = model_kind in ("embedding", "fusion")

    std = None
    ling = {}
    if need_ling:
        ling["train"], std = feature_matrix(train_view, lexicon, tagger)
        ling["val"], _ = feature_matrix(val_view, lexicon, tagger, std)
        if test_view:
            ling["test"], _ = feature_matrix(test_view, lexicon, tagger, std)
    emb = {}
    if need_emb:
        emb["train"] = embedding_rows(cfg, train_view, store)
        emb["val"] = embedding_rows(cfg, val_view, store)
        if test_view:
            emb["test"] = embedding_rows(cfg, test_view, store)

    def pack(name, view):
        if not view:
            return None
        if model_kind == "fusion":
            return _split_data(view, model_kind, X_emb=emb[name],
                               X_ling=ling[name])
        if model_kind == "embedding":
            return _split_data(view, model_kind, X=emb[name])
        return _split_data(view, model_kind, X=ling[name])

    return (pack("train", train_view), pack("val", val_view),
            pack("test", test_view), std)


def train_config_for(cfg: PipelineConfig, model_kind: str) -> TrainConfig:
    shared = dict(epochs=cfg["train.epochs"],
                  batch_size=cfg["train.batch_size"],
                  seeds=tuple(cfg["train.seeds"]))
    if model_kind == "fusion":
        f = cfg["train.fusion"]
        return TrainConfig(lr=f["lr"], weight_decay=f["weight_decay"],
                           emb_hidden=f["emb_hidden"],
                           ling_hidden=f["ling_hidden"],
                           emb_dropout=f["emb_dropout"],
                           ling_dropout=f["ling_dropout"], **shared)
    m = cfg[f"train.{model_kind}"]
    return TrainConfig(lr=m["lr"], weight_decay=m["weight_decay"],
                       hidden=m["hidden"], dropout=m["dropout"], **shared)


def run_training(cfg: PipelineConfig, corpus: Corpus, model_kind: str,
                 out_dir: str | Path, lexicon=None, tagger=None,
                 extra_train: list[Transcript] | None = None,
                 store: EmbeddingStore | None = None,
                 report_name: str | None = None) -> dict:
    """Train one model kind, write per-seed checkpoints plus the report
    JSON, and return the report."""
    lexicon = lexicon if lexicon is not None else load_lexicon(cfg["paths.lexicon"])
    tagger = tagger if tagger is not None else load_tagger(cfg["paths.tagger_model"])
    tr, va, te, std = build_model_data(cfg, corpus, model_kind, lexicon,
                                       tagger, extra_train, store)
    tcfg = train_config_for(cfg, model_kind)
    checkpoints, report = train(model_kind, tr, va, te, tcfg)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = report_name or model_kind
    if std is not None:
        std_path = out / f"{name}_standardization.json"
        std_path.write_text(json.dumps(std.to_dict()), encoding="utf-8")
        for ck in checkpoints:
            ck.standardization_ref = std_path.name
    for ck in checkpoints:
        ck.save(out / f"{name}_seed{ck.seed}.ckpt.json")
    report["n_train"] = len(tr)
    report["n_extra_train"] = len(extra_train or [])
    (out / f"{name}_report.json").write_text(
        json.dumps(report, sort_keys=True, indent=1), encoding="utf-8")
    return report
