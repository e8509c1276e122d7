import numpy as np
import pytest

from speechscreen.embeddings import (DimMismatch, EmbeddingRecord,
                                     EmbeddingStore, MalformedRecord,
                                     MissingKey, RemoteConfig, content_hash,
                                     fetch_remote, get_sentence,
                                     hash_embedding, load_store, write_store)
from speechscreen.httpclient import SchemaError, TransportError

from conftest import json_server


def _rec(key, provider="p", dim=4, vals=None):
    return EmbeddingRecord(key=key, provider=provider, dim=dim,
                           sentence=tuple(vals or [0.1] * dim))


class TestStore:
    def test_load_two_rows(self, tmp_path):
        path = tmp_path / "store.jsonl"
        store = EmbeddingStore()
        store.add(_rec("a"))
        store.add(_rec("b"))
        write_store(store, path)
        loaded = load_store(path)
        assert len(loaded) == 2
        assert loaded.dims == {"p": 4}

    def test_dim_mismatch_within_provider(self):
        store = EmbeddingStore()
        store.add(_rec("a", dim=4))
        with pytest.raises(DimMismatch):
            store.add(_rec("b", dim=5, vals=[0.0] * 5))

    def test_roundtrip_content_equal(self, tmp_path):
        p1 = tmp_path / "a.jsonl"
        p2 = tmp_path / "b.jsonl"
        store = EmbeddingStore()
        store.add(EmbeddingRecord(key="k", provider="p", dim=3,
                                  sentence=(0.1, -2.5e-7, 3.0),
                                  tokens=((1.0, 0.0, 0.5),),
                                  token_strings=("word",), pooling="mean"))
        write_store(store, p1)
        write_store(load_store(p1), p2)
        assert p1.read_text() == p2.read_text()

    def test_get_sentence_exact(self):
        store = EmbeddingStore()
        vals = (0.25, -1.0, 3.5, 1e-12)
        store.add(EmbeddingRecord(key="k", provider="p", dim=4, sentence=vals))
        assert get_sentence(store, "p", "k").tolist() == list(vals)

    def test_missing_key(self):
        store = EmbeddingStore()
        store.add(_rec("a"))
        with pytest.raises(MissingKey):
            get_sentence(store, "p", "zzz")
        with pytest.raises(MissingKey):
            get_sentence(store, "other-provider", "a")

    def test_malformed_row(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"key": "a", "provider": "p", "dim": 3, '
                        '"sentence": [1.0]}\n')
        with pytest.raises(MalformedRecord, match="bad.jsonl:1"):
            load_store(path)

    def test_nonfinite_rejected(self):
        with pytest.raises(MalformedRecord):
            EmbeddingRecord(key="k", provider="p", dim=2,
                            sentence=(float("nan"), 1.0))


class TestFetchRemote:
    def test_two_texts_dim_three(self, fast_retry):
        def behavior(payload):
            return 200, {"dim": 3,
                         "vectors": [[0.1, 0.2, 0.3]] * len(payload["inputs"])}

        with json_server(behavior) as url:
            cfg = RemoteConfig(endpoint=url, model="m", provider="svc",
                               retry=fast_retry)
            recs = fetch_remote(cfg, ["one text", "two text"])
        assert len(recs) == 2
        assert all(r.dim == 3 for r in recs)
        assert recs[0].key == content_hash("one text")

    def test_retry_then_success(self, fast_retry):
        calls = {"n": 0}

        def behavior(payload):
            calls["n"] += 1
            if calls["n"] <= 2:
                return 500, {"error": "overloaded"}
            return 200, {"dim": 2, "vectors": [[1.0, 2.0]]}

        with json_server(behavior) as url:
            cfg = RemoteConfig(endpoint=url, model="m", retry=fast_retry)
            recs = fetch_remote(cfg, ["text"])
        assert calls["n"] == 3
        assert recs[0].sentence == (1.0, 2.0)

    def test_persistent_failure_exhausts_retries(self, fast_retry):
        def behavior(payload):
            return 500, {"error": "down"}

        with json_server(behavior) as url:
            cfg = RemoteConfig(endpoint=url, model="m", retry=fast_retry)
            with pytest.raises(TransportError):
                fetch_remote(cfg, ["text"])

    def test_wrong_arity_names_offending_index(self, fast_retry):
        def behavior(payload):
            return 200, {"dim": 3, "vectors": [[0.1, 0.2, 0.3], [0.1]]}

        with json_server(behavior) as url:
            cfg = RemoteConfig(endpoint=url, model="m", retry=fast_retry)
            with pytest.raises(SchemaError, match="input 1"):
                fetch_remote(cfg, ["a", "b"])

    def test_token_granularity(self, fast_retry):
        def behavior(payload):
            return 200, {"dim": 2, "vectors": [
                {"token_strings": ["a", "b"],
                 "matrix": [[1.0, 0.0], [0.0, 1.0]]}]}

        with json_server(behavior) as url:
            cfg = RemoteConfig(endpoint=url, model="m", granularity="tokens",
                               retry=fast_retry)
            recs = fetch_remote(cfg, ["a b"])
        assert recs[0].token_matrix().tolist() == [[1.0, 0.0], [0.0, 1.0]]
        assert recs[0].sentence == (0.5, 0.5)

    def test_cache_coherence_fetch_store_lookup(self, tmp_path, fast_retry):
        def behavior(payload):
            return 200, {"dim": 2, "vectors": [[0.123456789012345, -7.5]]}

        with json_server(behavior) as url:
            cfg = RemoteConfig(endpoint=url, model="m", provider="svc",
                               retry=fast_retry)
            recs = fetch_remote(cfg, ["hello"])
        store = EmbeddingStore()
        store.add(recs[0])
        path = tmp_path / "s.jsonl"
        write_store(store, path)
        loaded = load_store(path)
        got = get_sentence(loaded, "svc", content_hash("hello"))
        assert got.tolist() == [0.123456789012345, -7.5]


class TestHashEmbedding:
    def test_deterministic(self):
        a = hash_embedding("the boy fell", 32)
        b = hash_embedding("the boy fell", 32)
        assert np.array_equal(a, b)

    def test_unit_norm(self):
        v = hash_embedding("some words here", 16)
        assert np.linalg.norm(v) == pytest.approx(1.0)

    def test_different_texts_differ(self):
        assert not np.array_equal(hash_embedding("cookie jar", 32),
                                  hash_embedding("water overflow", 32))
