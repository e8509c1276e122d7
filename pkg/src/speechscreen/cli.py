"""Command-line interface.

Subcommands mirror the pipeline stages: ingest, features, embed-fetch,
train, augment-export, augment-generate, augment-sweep, quality, judge,
report, toydata. Only embed-fetch, augment-generate, and judge touch the
network; every other subcommand runs with the network guard set to
forbidden (override with --network).

Exit codes: 0 ok, 1 runtime error (machine-readable JSON on stderr),
2 usage error.
"""

from __future__ import annotations

import csv
import json
import sys
import time
from dataclasses import replace
from functools import wraps
from pathlib import Path

import click
import numpy as np

from . import __version__
from .config import ConfigError, PipelineConfig
from .corpus import Split, corpus_stats
from .httpclient import RetryPolicy, set_network_mode
from .embeddings import (EmbeddingRecord, EmbeddingStore, RemoteConfig,
                         fetch_remote, hash_embedding, write_store, HASH_PROVIDER,
                         load_store)
from .lingfeat import feature_matrix, features_to_csv, extract_features
from .pipeline import load_inputs, run_training, embedding_rows
from .augment import (Bounds, ChatClient, GENERATOR_PRESETS, GeneratorConfig,
                      SyntheticCorpus, augment_training_set,
                      export_finetune_dataset, generate_synthetic)
from .llmjudge import JudgeConfig, evaluate_judge
from .textsim import TsneConfig, bertscore, bleu, overlap_report, tsne


def _load_config(config_path: str | None) -> PipelineConfig:
    if config_path:
        return PipelineConfig.load(config_path)
    return PipelineConfig.defaults()


def _out_dir(cfg: PipelineConfig, out: str | None) -> Path:
    d = Path(out or cfg["paths.output_dir"])
    d.mkdir(parents=True, exist_ok=True)
    return d


def _record_run(out: Path, cfg: PipelineConfig, subcommand: str) -> None:
    manifest_path = out / "run_manifest.json"
    manifest = {}
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    manifest[subcommand] = {"config_hash": cfg.config_hash(),
                            "version": __version__}
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=1),
                             encoding="utf-8")
    # wall-clock times live apart so reports stay byte-reproducible
    prov_path = out / "provenance.json"
    prov = {}
    if prov_path.exists():
        prov = json.loads(prov_path.read_text(encoding="utf-8"))
    prov.setdefault(subcommand, []).append(time.time())
    prov_path.write_text(json.dumps(prov, sort_keys=True, indent=1),
                         encoding="utf-8")


def _fail_json(exc: Exception) -> None:
    sys.stderr.write(json.dumps({"error": type(exc).__name__,
                                 "message": str(exc)}) + "\n")


def pipeline_command(needs_network: bool = False):
    """Common options + error handling + network guard for a subcommand."""
    def deco(fn):
        @click.option("--config", "config_path", type=click.Path(exists=True),
                      default=None, help="pipeline config YAML")
        @click.option("--out", default=None, help="output directory")
        @click.option("--network",
                      type=click.Choice(["allowed", "forbidden"]),
                      default=None,
                      help="network policy (defaults by subcommand)")
        @wraps(fn)
        def wrapper(config_path, out, network, **kw):
            try:
                cfg = _load_config(config_path)
                mode = network or ("allowed" if needs_network else "forbidden")
                set_network_mode(mode)
                out_path = _out_dir(cfg, out)
                fn(cfg=cfg, out=out_path, **kw)
                _record_run(out_path, cfg, fn.__name__.replace("_", "-"))
            except click.ClickException:
                raise
            except Exception as exc:
                _fail_json(exc)
                sys.exit(1)
        return wrapper
    return deco


@click.group()
@click.version_option(__version__)
def main():
    """Speech-based cognitive-impairment screening pipeline."""


@main.command()
@pipeline_command()
def ingest(cfg, out):
    """Load the manifest, parse transcripts, write corpus stats."""
    corpus, _, _ = load_inputs(cfg)
    rows = corpus_stats(corpus)
    with (out / "corpus_stats.csv").open("w", newline="",
                                         encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    counts = {f"{s.value}/{l.value}": n
              for (s, l), n in sorted(corpus.counts().items(),
                                      key=lambda kv: (kv[0][0].value,
                                                      kv[0][1].value))}
    (out / "corpus_summary.json").write_text(
        json.dumps({"n": len(corpus.transcripts), "counts": counts},
                   sort_keys=True, indent=1), encoding="utf-8")
    click.echo(f"loaded {len(corpus.transcripts)} transcripts -> {out}")


@main.command()
@pipeline_command()
def features(cfg, out):
    """Extract the 110 linguistic features for every transcript."""
    corpus, lexicon, tagger = load_inputs(cfg)
    all_t = sorted(corpus.transcripts, key=lambda t: t.id)
    X = np.stack([extract_features(t, lexicon, tagger) for t in all_t])
    (out / "features.csv").write_text(
        features_to_csv([t.id for t in all_t], X), encoding="utf-8")
    train_view = corpus.view(Split.TRAIN)
    if train_view:
        _, std = feature_matrix(train_view, lexicon, tagger)
        (out / "standardization.json").write_text(
            json.dumps(std.to_dict()), encoding="utf-8")
    click.echo(f"wrote features for {len(all_t)} transcripts -> {out}")


@main.command("embed-fetch")
@pipeline_command(needs_network=True)
def embed_fetch(cfg, out):
    """Fetch sentence embeddings for every transcript from the configured
    embedding service and write a store keyed by transcript id."""
    corpus, _, _ = load_inputs(cfg)
    endpoint = cfg["embedding.endpoint"]
    if not endpoint:
        raise ConfigError("embedding.endpoint is required for embed-fetch")
    rc = RemoteConfig(endpoint=endpoint,
                      model=cfg["embedding.model"] or cfg["embedding.provider"],
                      provider=cfg["embedding.provider"],
                      granularity=cfg["embedding.granularity"],
                      batch_size=cfg["embedding.batch_size"],
                      api_key_env=cfg["embedding.api_key_env"])
    ordered = sorted(corpus.transcripts, key=lambda t: t.id)
    fetched = fetch_remote(rc, [t.text for t in ordered])
    store = EmbeddingStore()
    for t, rec in zip(ordered, fetched):
        store.add(EmbeddingRecord(key=t.id, provider=rec.provider,
                                  dim=rec.dim, sentence=rec.sentence,
                                  tokens=rec.tokens,
                                  token_strings=rec.token_strings,
                                  pooling=rec.pooling))
    path = out / "embeddings.jsonl"
    write_store(store, path)
    click.echo(f"fetched {len(store)} embeddings -> {path}")


@main.command()
@click.option("--model", "model_kind", required=True,
              type=click.Choice(["embedding", "linguistic", "fusion"]))
@click.option("--seed-list", default=None,
              help="comma-separated seeds overriding the config")
@pipeline_command()
def train(cfg, out, model_kind, seed_list):
    """Train one model kind with the multi-seed protocol."""
    if seed_list:
        cfg.tree["train"]["seeds"] = [int(s) for s in seed_list.split(",")]
    corpus, lexicon, tagger = load_inputs(cfg)
    report = run_training(cfg, corpus, model_kind, out, lexicon, tagger)
    agg = report.get("aggregate", {}).get("f1", {})
    click.echo(f"{model_kind}: test F1 {agg.get('mean', float('nan')):.4f} "
               f"+- {agg.get('std', float('nan')):.4f} -> {out}")


@main.command("augment-export")
@pipeline_command()
def augment_export(cfg, out):
    """Export the fine-tune dataset (chat-format JSONL)."""
    corpus, _, _ = load_inputs(cfg)
    path = out / "finetune_dataset.jsonl"
    n = export_finetune_dataset(corpus, path)
    click.echo(f"exported {n} fine-tune records -> {path}")


def _generator_config(cfg: PipelineConfig) -> GeneratorConfig:
    name = cfg["augment.generator"]
    gen = GENERATOR_PRESETS.get(name)
    if gen is None:
        gen = GeneratorConfig(provider=name, model=name)
    return replace(gen, conditioning=cfg["augment.conditioning"])


def _chat_client(cfg: PipelineConfig, endpoint_key: str,
                 api_env_key: str) -> ChatClient:
    endpoint = cfg[endpoint_key]
    if not endpoint:
        raise ConfigError(f"{endpoint_key} is required")
    return ChatClient(endpoint=endpoint, api_key_env=cfg[api_env_key],
                      retry=RetryPolicy())


@main.command("augment-generate")
@click.option("--multiplier", type=int, default=1,
              help="accepted samples = multiplier x |train|")
@click.option("--n", "n_override", type=int, default=None,
              help="explicit number of accepted samples")
@pipeline_command(needs_network=True)
def augment_generate(cfg, out, multiplier, n_override):
    """Generate a validated synthetic corpus via the configured LLM."""
    corpus, _, _ = load_inputs(cfg)
    n = n_override or multiplier * len(corpus.view(Split.TRAIN))
    gen = _generator_config(cfg)
    client = _chat_client(cfg, "augment.endpoint", "augment.api_key_env")
    bounds = Bounds(min_words=cfg["augment.min_words"],
                    max_words=cfg["augment.max_words"],
                    near_duplicate_jaccard=cfg["augment.near_duplicate_jaccard"])
    synth = generate_synthetic(
        client, gen, n, label_mix=cfg["augment.label_mix"], bounds=bounds,
        max_attempts_per_sample=cfg["augment.max_attempts_per_sample"])
    path = out / f"synthetic_{gen.provider}.jsonl"
    synth.write_jsonl(path)
    counts = synth.label_counts()
    click.echo(f"accepted {len(synth.accepted())} samples "
               f"({counts}) -> {path}")


@main.command("augment-sweep")
@click.option("--multipliers", default="1..5",
              help="e.g. 1..5 or 1,2,4")
@click.option("--seed-list", default=None)
@pipeline_command()
def augment_sweep(cfg, out, multipliers, seed_list):
    """Retrain the fusion model at several augmentation volumes."""
    if seed_list:
        cfg.tree["train"]["seeds"] = [int(s) for s in seed_list.split(",")]
    if ".." in multipliers:
        lo, hi = multipliers.split("..")
        ks = list(range(int(lo), int(hi) + 1))
    else:
        ks = [int(k) for k in multipliers.split(",")]
    synth_path = cfg["paths.synthetic"]
    if not synth_path:
        raise ConfigError("paths.synthetic is required for augment-sweep")
    synth = SyntheticCorpus.read_jsonl(synth_path)
    corpus, lexicon, tagger = load_inputs(cfg)
    for k in ks:
        extra = augment_training_set(corpus, synth, k)[
            len(corpus.view(Split.TRAIN)):]
        report = run_training(cfg, corpus, "fusion", out, lexicon, tagger,
                              extra_train=extra,
                              report_name=f"fusion_aug{k}x")
        agg = report["aggregate"]["f1"]
        click.echo(f"{k}x: test F1 {agg['mean']:.4f} +- {agg['std']:.4f}")


def _load_synthetic(cfg) -> SyntheticCorpus:
    path = cfg["paths.synthetic"]
    if not path:
        raise ConfigError("paths.synthetic is required for quality metrics")
    return SyntheticCorpus.read_jsonl(path)


def _token_vectors(text: str, dim: int) -> tuple[np.ndarray, list[str]]:
    from .lingfeat import tokenize
    words = tokenize(text).words
    return np.stack([hash_embedding(w, dim) for w in words]), words


@main.command()
@click.option("--metric", required=True,
              type=click.Choice(["bleu", "bertscore", "tsne"]))
@pipeline_command()
def quality(cfg, out, metric):
    """Synthetic-vs-real similarity metrics and embedding-space overlap."""
    from .lingfeat import tokenize
    corpus, _, _ = load_inputs(cfg)
    synth = _load_synthetic(cfg)
    accepted = synth.accepted()
    generator = synth.generator.get("provider", "generator")
    val = corpus.view(Split.VALIDATION)
    dim = cfg["embedding.dim"]

    if metric == "bleu":
        policy = cfg["quality.bleu_reference_policy"]
        cands, refs = [], []
        for s in accepted:
            cand = tokenize(s.text).words
            cands.append(cand)
            same = [tokenize(t.text).words for t in val
                    if t.label is s.target_label]
            same = same or [tokenize(t.text).words for t in val]
            if policy == "nearest":
                same = [min(same, key=lambda r: (abs(len(r) - len(cand)),
                                                 len(r)))]
            refs.append(same)
        rep = bleu(cands, refs)
        doc = {generator: {
            "scores": {str(n): v for n, v in rep.scores.items()},
            "precisions": {str(n): v for n, v in rep.precisions.items()},
            "brevity_penalty": rep.brevity_penalty,
            "geometric_mean": rep.geometric_mean}}
        path = out / "quality_bleu.json"
        _merge_json(path, doc)
        click.echo(f"BLEU-1 {rep.scores[1]:.4f} .. BLEU-4 {rep.scores[4]:.4f}"
                   f" -> {path}")

    elif metric == "bertscore":
        scores = []
        ref_mats = [( _token_vectors(t.text, dim), t.label) for t in val]
        for s in accepted:
            cmat, _ = _token_vectors(s.text, dim)
            best = None
            for (rmat, _), label in ref_mats:
                if label is not s.target_label:
                    continue
                r = bertscore(cmat, rmat)
                if best is None or r.f1 > best.f1:
                    best = r
            if best is not None:
                scores.append(best)
        doc = {generator: {
            "precision": float(np.mean([s.precision for s in scores])),
            "recall": float(np.mean([s.recall for s in scores])),
            "f1": float(np.mean([s.f1 for s in scores])),
            "provider": HASH_PROVIDER, "n": len(scores)}}
        path = out / "quality_bertscore.json"
        _merge_json(path, doc)
        click.echo(f"token-similarity F1 {doc[generator]['f1']:.4f} -> {path}")

    else:  # tsne
        groups, rows = {}, []
        store = None
        if cfg["embedding.provider"] != HASH_PROVIDER and cfg["paths.embedding_store"]:
            store = load_store(cfg["paths.embedding_store"])
        for name, view in (("train", corpus.view(Split.TRAIN)),
                           ("validation", val),
                           ("test", corpus.view(Split.TEST))):
            if view:
                groups[name] = embedding_rows(cfg, view, store)
        if accepted:
            groups["synthetic"] = np.stack(
                [hash_embedding(s.text, dim) for s in accepted])
        X = np.vstack([groups[g] for g in sorted(groups)])
        n = X.shape[0]
        tcfg = TsneConfig(perplexity=min(cfg["quality.tsne_perplexity"],
                                         (n - 1) / 3.0),
                          iterations=cfg["quality.tsne_iterations"],
                          seed=cfg["quality.tsne_seed"])
        result = tsne(X, tcfg)
        offset = 0
        coords = {}
        for g in sorted(groups):
            m = len(groups[g])
            coords[g] = result.coordinates[offset:offset + m]
            for x, y in coords[g]:
                rows.append({"group": g, "x": repr(float(x)),
                             "y": repr(float(y))})
            offset += m
        with (out / "tsne_coordinates.csv").open(
                "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=["group", "x", "y"])
            writer.writeheader()
            writer.writerows(rows)
        stats = overlap_report(coords)
        stats["kl_divergence"] = result.kl_divergence
        (out / "tsne_overlap.json").write_text(
            json.dumps(stats, sort_keys=True, indent=1), encoding="utf-8")
        click.echo(f"t-SNE of {n} points, KL {result.kl_divergence:.4f}, "
                   f"mixing {stats['mixing_overall']:.3f} -> {out}")


def _merge_json(path: Path, doc: dict) -> None:
    merged = {}
    if path.exists():
        merged = json.loads(path.read_text(encoding="utf-8"))
    merged.update(doc)
    path.write_text(json.dumps(merged, sort_keys=True, indent=1),
                    encoding="utf-8")


@main.command()
@click.option("--split", default="test",
              type=click.Choice(["train", "validation", "test"]))
@pipeline_command(needs_network=True)
def judge(cfg, out, split):
    """Zero-shot / fine-tuned LLM classification of one split."""
    corpus, _, _ = load_inputs(cfg)
    view = corpus.view(Split(split))
    provider = cfg["judge.provider"]
    gen = GENERATOR_PRESETS.get(provider)
    if gen is None:
        gen = GeneratorConfig(provider=provider,
                              model=cfg["judge.model"] or provider)
    elif cfg["judge.model"]:
        gen = replace(gen, model=cfg["judge.model"])
    jcfg = JudgeConfig(generator=gen, temperature=cfg["judge.temperature"],
                       max_retries=cfg["judge.max_retries"])
    client = _chat_client(cfg, "judge.endpoint", "judge.api_key_env")
    report = evaluate_judge(client, jcfg, view)
    verdicts = report.pop("verdicts")
    with (out / f"judge_{provider}_{split}_verdicts.jsonl").open(
            "w", encoding="utf-8") as fh:
        for v in verdicts:
            fh.write(json.dumps(v, sort_keys=True) + "\n")
    (out / f"judge_{provider}_{split}.json").write_text(
        json.dumps(report, sort_keys=True, indent=1), encoding="utf-8")
    click.echo(f"judge {provider} on {split}: F1 {report['f1']:.4f}, "
               f"unparseable {report['unparseable_rate']:.3f} -> {out}")


@main.command()
@click.option("--reports", "reports_dir", default=None,
              help="directory of report JSON files (default: output dir)")
@pipeline_command()
def report(cfg, out, reports_dir):
    """Consolidate reports into CSV tables and SVG figures."""
    from .report import render_report
    src = Path(reports_dir) if reports_dir else out
    written = render_report(src, out)
    click.echo(f"wrote {', '.join(written)} -> {out}")


@main.command()
@click.option("--shape", default="toy", type=click.Choice(["toy", "study"]))
@click.option("--seed", default=7, type=int)
@pipeline_command()
def toydata(cfg, out, shape, seed):
    """Materialize the bundled synthetic corpus (manifest + transcripts)."""
    from .toydata import materialize
    manifest = materialize(out, shape=shape, seed=seed)
    click.echo(f"wrote {shape} corpus manifest -> {manifest}")


if __name__ == "__main__":
    main()
