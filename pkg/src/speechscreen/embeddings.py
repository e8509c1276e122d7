"""Embedding providers: a JSONL file store of precomputed vectors, an HTTP
embedding-service client, and a deterministic hashed bag-of-words provider
for offline/toy runs.

Store rows are one JSON object per line:
  {"key": ..., "provider": ..., "dim": d, "sentence": [d floats],
   "tokens": [[d floats] ...] | null, "token_strings": [...] | null,
   "pooling": "..."}

Floats survive round-trips exactly (shortest-representation decimal via
json). Stores are append-only; records are never mutated.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .httpclient import RetryPolicy, SchemaError, post_json, bearer_headers


class MissingKey(KeyError):
    pass


class DimMismatch(Exception):
    pass


class MalformedRecord(Exception):
    pass


@dataclass(frozen=True)
class EmbeddingRecord:
    key: str
    provider: str
    dim: int
    sentence: tuple[float, ...]
    tokens: tuple[tuple[float, ...], ...] | None = None
    token_strings: tuple[str, ...] | None = None
    pooling: str = ""

    def __post_init__(self):
        if self.dim <= 0 or len(self.sentence) != self.dim:
            raise MalformedRecord(
                f"{self.provider}/{self.key}: sentence length "
                f"{len(self.sentence)} != dim {self.dim}")
        if not all(math.isfinite(v) for v in self.sentence):
            raise MalformedRecord(f"{self.provider}/{self.key}: non-finite value")
        if self.tokens is not None:
            if self.token_strings is None or len(self.tokens) != len(self.token_strings):
                raise MalformedRecord(
                    f"{self.provider}/{self.key}: token rows and strings differ")
            for row in self.tokens:
                if len(row) != self.dim or not all(math.isfinite(v) for v in row):
                    raise MalformedRecord(
                        f"{self.provider}/{self.key}: bad token row")

    def sentence_array(self) -> np.ndarray:
        return np.asarray(self.sentence, dtype=np.float64)

    def token_matrix(self) -> np.ndarray | None:
        if self.tokens is None:
            return None
        return np.asarray(self.tokens, dtype=np.float64)

    def to_json(self) -> str:
        return json.dumps({
            "key": self.key, "provider": self.provider, "dim": self.dim,
            "sentence": list(self.sentence),
            "tokens": [list(r) for r in self.tokens] if self.tokens else None,
            "token_strings": list(self.token_strings) if self.token_strings else None,
            "pooling": self.pooling,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "EmbeddingRecord":
        try:
            d = json.loads(line)
            return cls(
                key=d["key"], provider=d["provider"], dim=int(d["dim"]),
                sentence=tuple(float(v) for v in d["sentence"]),
                tokens=(tuple(tuple(float(v) for v in row) for row in d["tokens"])
                        if d.get("tokens") else None),
                token_strings=(tuple(d["token_strings"])
                               if d.get("token_strings") else None),
                pooling=d.get("pooling", ""),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(f"bad embedding row: {exc}: {line[:120]}")


class EmbeddingStore:
    def __init__(self):
        self._records: dict[tuple[str, str], EmbeddingRecord] = {}
        self.dims: dict[str, int] = {}

    def __len__(self):
        return len(self._records)

    def add(self, rec: EmbeddingRecord) -> None:
        known = self.dims.get(rec.provider)
        if known is not None and known != rec.dim:
            raise DimMismatch(
                f"provider {rec.provider!r}: dim {rec.dim} != established {known}")
        self.dims[rec.provider] = rec.dim
        self._records[(rec.provider, rec.key)] = rec

    def get(self, provider: str, key: str) -> EmbeddingRecord:
        try:
            return self._records[(provider, key)]
        except KeyError:
            raise MissingKey(f"no record for provider={provider!r} key={key!r}")

    def records(self) -> list[EmbeddingRecord]:
        return [self._records[k] for k in sorted(self._records)]


def load_store(path: str | Path) -> EmbeddingStore:
    store = EmbeddingStore()
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                store.add(EmbeddingRecord.from_json(line))
            except MalformedRecord as exc:
                raise MalformedRecord(f"{path}:{lineno}: {exc}")
    return store


def write_store(store: EmbeddingStore, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for rec in store.records():
            fh.write(rec.to_json() + "\n")


def get_sentence(store: EmbeddingStore, provider: str, key: str) -> np.ndarray:
    return store.get(provider, key).sentence_array()


def content_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# ----------------------------------------------------------- remote ------

@dataclass(frozen=True)
class RemoteConfig:
    endpoint: str
    model: str
    provider: str = ""
    granularity: str = "sentence"  # or "tokens"
    batch_size: int = 16
    timeout: float = 60.0
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    api_key_env: str | None = None

    @property
    def provider_name(self) -> str:
        return self.provider or self.model


def fetch_remote(cfg: RemoteConfig, texts: list[str],
                 session=None) -> list[EmbeddingRecord]:
    """Fetch embeddings for texts, keyed by content hash, in batches.

    Wire format: POST {"model", "inputs", "granularity"} ->
    {"dim": d, "vectors": [...]}, where a sentence-granularity vector is a
    flat list and a tokens-granularity entry is
    {"token_strings": [...], "matrix": [[...], ...]}.
    """
    records: list[EmbeddingRecord] = []
    headers = bearer_headers(cfg.api_key_env)
    for start in range(0, len(texts), cfg.batch_size):
        batch = texts[start:start + cfg.batch_size]
        resp = post_json(cfg.endpoint,
                         {"model": cfg.model, "inputs": batch,
                          "granularity": cfg.granularity},
                         headers=headers, timeout=cfg.timeout, retry=cfg.retry,
                         session=session)
        if "dim" not in resp or "vectors" not in resp:
            raise SchemaError(f"response missing dim/vectors: {list(resp)}")
        dim = int(resp["dim"])
        vectors = resp["vectors"]
        if len(vectors) != len(batch):
            raise SchemaError(
                f"got {len(vectors)} vectors for {len(batch)} inputs")
        for i, (text, vec) in enumerate(zip(batch, vectors)):
            idx = start + i
            if cfg.granularity == "sentence":
                if not isinstance(vec, list) or len(vec) != dim:
                    raise SchemaError(
                        f"input {idx}: expected a length-{dim} vector")
                records.append(EmbeddingRecord(
                    key=content_hash(text), provider=cfg.provider_name,
                    dim=dim, sentence=tuple(float(v) for v in vec),
                    pooling="service"))
            else:
                if (not isinstance(vec, dict) or "matrix" not in vec
                        or "token_strings" not in vec):
                    raise SchemaError(
                        f"input {idx}: expected token_strings + matrix")
                matrix = vec["matrix"]
                if any(len(row) != dim for row in matrix):
                    raise SchemaError(f"input {idx}: token row arity != {dim}")
                sent = [sum(col) / len(matrix) for col in zip(*matrix)] \
                    if matrix else [0.0] * dim
                records.append(EmbeddingRecord(
                    key=content_hash(text), provider=cfg.provider_name,
                    dim=dim, sentence=tuple(sent),
                    tokens=tuple(tuple(float(v) for v in row) for row in matrix),
                    token_strings=tuple(vec["token_strings"]),
                    pooling="mean-of-tokens"))
    return records


# -------------------------------------------------- deterministic hash ----

HASH_PROVIDER = "hash-bow-v1"


def hash_embedding(text: str, dim: int = 32) -> np.ndarray:
    """Deterministic signed hashed bag-of-words embedding, L2-normalized.

    sha256-based, so stable across processes and platforms; used as the
    offline stand-in for transformer sentence embeddings.
    """
    from .lingfeat import tokenize
    vec = np.zeros(dim, dtype=np.float64)
    for word in tokenize(text).words:
        h = hashlib.sha256(word.encode("utf-8")).digest()
        bucket = int.from_bytes(h[:4], "little") % dim
        sign = 1.0 if h[4] & 1 else -1.0
        vec[bucket] += sign
    norm = float(np.linalg.norm(vec))
    return vec / norm if norm else vec


def hash_record(text: str, key: str | None = None, dim: int = 32) -> EmbeddingRecord:
    vec = hash_embedding(text, dim)
    return EmbeddingRecord(key=key or content_hash(text), provider=HASH_PROVIDER,
                           dim=dim, sentence=tuple(float(v) for v in vec),
                           pooling="hashed-bow")
