"""Pipeline configuration: a single YAML document validated against a
schema tree (unknown keys are rejected with their location), with
``${ENV_VAR}`` interpolation for secrets. Defaults reproduce the standard
training settings, so a config that only names its input paths runs the
reference setup.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from pathlib import Path

import yaml


class ConfigError(Exception):
    pass


# Schema: dict -> nested; (type, default) -> leaf. `None` default means
# optional with no value.
_SCHEMA = {
    "paths": {
        "manifest": (str, None),
        "lexicon": (str, None),
        "tagger_model": (str, None),
        "embedding_store": (str, None),
        "synthetic": (str, None),
        "output_dir": (str, "out"),
    },
    "embedding": {
        "provider": (str, "hash-bow-v1"),
        "dim": (int, 32),
        "endpoint": (str, None),
        "model": (str, None),
        "granularity": (str, "sentence"),
        "batch_size": (int, 16),
        "api_key_env": (str, None),
    },
    "train": {
        "seeds": (list, [0, 1, 2, 3, 4]),
        "epochs": (int, 50),
        "batch_size": (int, 8),
        "embedding": {
            "hidden": (int, 256),
            "dropout": (float, 0.4),
            "lr": (float, 2e-5),
            "weight_decay": (float, 2e-3),
        },
        "linguistic": {
            "hidden": (int, 64),
            "dropout": (float, 0.0),
            "lr": (float, 8e-3),
            "weight_decay": (float, 1e-3),
        },
        "fusion": {
            "emb_hidden": (int, 256),
            "ling_hidden": (int, 128),
            "emb_dropout": (float, 0.4),
            "ling_dropout": (float, 0.0),
            "lr": (float, 2e-5),
            "weight_decay": (float, 2e-3),
        },
    },
    "augment": {
        "generator": (str, "medalpaca-7b"),
        "endpoint": (str, None),
        "api_key_env": (str, None),
        "conditioning": (str, "finetuned-neutral"),
        "label_mix": (float, 0.5),
        "min_words": (int, 10),
        "max_words": (int, 600),
        "near_duplicate_jaccard": (float, 0.8),
        "max_attempts_per_sample": (int, 6),
    },
    "judge": {
        "provider": (str, "gpt-4o"),
        "model": (str, None),
        "endpoint": (str, None),
        "api_key_env": (str, None),
        "temperature": (float, None),
        "max_retries": (int, 2),
    },
    "quality": {
        "provider": (str, None),
        "bleu_reference_policy": (str, "same-label"),  # or "nearest"
        "tsne_perplexity": (float, 30.0),
        "tsne_iterations": (int, 1000),
        "tsne_seed": (int, 0),
    },
}

_ENV_RE = re.compile(r"\$\{(\w+)\}")


def _interpolate(value):
    if isinstance(value, str):
        def sub(m):
            name = m.group(1)
            if name not in os.environ:
                raise ConfigError(f"environment variable {name} is not set")
            return os.environ[name]
        return _ENV_RE.sub(sub, value)
    if isinstance(value, list):
        return [_interpolate(v) for v in value]
    if isinstance(value, dict):
        return {k: _interpolate(v) for k, v in value.items()}
    return value


def _merge(schema: dict, user: dict, where: str) -> dict:
    out = {}
    for key, spec in schema.items():
        loc = f"{where}.{key}" if where else key
        if isinstance(spec, dict):
            sub = user.get(key, {})
            if sub is None:
                sub = {}
            if not isinstance(sub, dict):
                raise ConfigError(f"{loc}: expected a mapping")
            out[key] = _merge(spec, sub, loc)
        else:
            typ, default = spec
            if key in user and user[key] is not None:
                val = user[key]
                if typ is float and isinstance(val, int):
                    val = float(val)
                if typ is int and isinstance(val, bool):
                    raise ConfigError(f"{loc}: expected {typ.__name__}")
                if not isinstance(val, typ):
                    raise ConfigError(
                        f"{loc}: expected {typ.__name__}, "
                        f"got {type(val).__name__}")
                out[key] = val
            else:
                out[key] = default
    for key in user:
        if key not in schema:
            loc = f"{where}.{key}" if where else key
            raise ConfigError(f"{loc}: unknown key")
    return out


class PipelineConfig:
    def __init__(self, tree: dict, source_text: str = ""):
        self.tree = tree
        self.source_text = source_text

    def __getitem__(self, dotted: str):
        node = self.tree
        for part in dotted.split("."):
            node = node[part]
        return node

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.tree, sort_keys=True).encode("utf-8")).hexdigest()[:16]

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        text = Path(path).read_text(encoding="utf-8")
        return cls.parse(text)

    @classmethod
    def parse(cls, text: str) -> "PipelineConfig":
        try:
            user = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"config is not valid YAML: {exc}")
        if not isinstance(user, dict):
            raise ConfigError("config root must be a mapping")
        user = _interpolate(user)
        return cls(tree=_merge(_SCHEMA, user, ""), source_text=text)

    @classmethod
    def defaults(cls) -> "PipelineConfig":
        return cls.parse("")
