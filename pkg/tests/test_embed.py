from __future__ import annotations

import json
import math
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from statrag import (EmbedderKind, EmbedderSpec, EmbeddingCache,
                     EmbeddingError, LocalHashEmbedder, RemoteHttpEmbedder,
                     build_embedder, cosine, embed_batch, fnv1a64, tokenize)


def local_spec(dim=8) -> EmbedderSpec:
    return EmbedderSpec(kind=EmbedderKind.LOCAL_HASH, dim=dim)


# -- hashing and tokenization ----------------------------------------------

def test_fnv1a64_published_vectors():
    # Reference values from the FNV specification test suite.
    assert fnv1a64("") == 0xCBF29CE484222325
    assert fnv1a64("a") == 0xAF63DC4C8601EC8C
    assert fnv1a64("foobar") == 0x85944171F73967E8


def test_fnv1a64_matches_independent_implementation():
    def reference(text: str) -> int:
        h = 0xCBF29CE484222325
        for b in text.encode("utf-8"):
            h = ((h ^ b) * 0x100000001B3) % 2**64
        return h

    for text in ("", "a", "ab", "statute", "ünïcode", "18 U.S.C. 1030"):
        assert fnv1a64(text) == reference(text)


def test_tokenize_lowercases_and_splits():
    assert tokenize("Hello, World!") == ["hello", "world"]
    assert tokenize("Ohio Rev. Code § 1349.19") == ["ohio", "rev", "code", "1349", "19"]
    assert tokenize("snake_case") == ["snake", "case"]
    assert tokenize("") == []
    assert tokenize("   \n\t") == []


# -- local hashed bag of words ---------------------------------------------

def test_hash_embedding_known_positions():
    emb = LocalHashEmbedder(local_spec(dim=8))
    assert fnv1a64("a") % 8 == 4
    assert fnv1a64("b") % 8 == 5
    vec = emb.embed_text("a a b")
    expected = np.zeros(8)
    expected[4], expected[5] = 2.0, 1.0
    expected /= math.sqrt(5.0)
    np.testing.assert_allclose(vec, expected, atol=1e-12)


def test_empty_text_embeds_to_zero_vector():
    emb = LocalHashEmbedder(local_spec())
    assert np.all(emb.embed_text("") == 0.0)
    assert np.all(emb.embed_text("!!! ???") == 0.0)


def test_embed_batch_matches_single_calls():
    emb = LocalHashEmbedder(local_spec(dim=32))
    texts = ["one", "two words", "three word text"]
    for single, batched in zip([emb.embed_text(t) for t in texts],
                               emb.embed_batch(texts)):
        np.testing.assert_array_equal(single, batched)


@settings(max_examples=100, deadline=None)
@given(text=st.text(max_size=200))
def test_embeddings_are_unit_or_zero(text):
    vec = LocalHashEmbedder(local_spec(dim=16)).embed_text(text)
    norm = float(np.linalg.norm(vec))
    if tokenize(text):
        assert norm == pytest.approx(1.0, abs=1e-9)
    else:
        assert norm == 0.0


def test_spec_validation():
    with pytest.raises(ValueError):
        EmbedderSpec(kind=EmbedderKind.LOCAL_HASH, dim=4)
    with pytest.raises(ValueError):
        EmbedderSpec(kind=EmbedderKind.REMOTE_HTTP)
    spec = local_spec(dim=64)
    assert spec.fingerprint == "local_hash::64"
    assert EmbedderSpec.from_dict(spec.to_dict()) == spec


# -- cosine ----------------------------------------------------------------

def test_cosine_basics():
    a = np.array([1.0, 0.0, 0.0])
    b = np.array([0.0, 1.0, 0.0])
    assert cosine(a, a) == pytest.approx(1.0)
    assert cosine(a, b) == pytest.approx(0.0)
    assert cosine(a, -a) == pytest.approx(-1.0)
    assert cosine(a, np.zeros(3)) == 0.0
    with pytest.raises(ValueError):
        cosine(a, np.zeros(4))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=3, max_size=3),
       st.lists(st.floats(-100, 100), min_size=3, max_size=3))
def test_cosine_symmetric_and_bounded(xs, ys):
    a, b = np.array(xs), np.array(ys)
    s = cosine(a, b)
    assert s == pytest.approx(cosine(b, a), abs=1e-12)
    assert -1.0 - 1e-9 <= s <= 1.0 + 1e-9


def test_cosine_scale_invariant():
    rng = np.random.default_rng(7)
    a, b = rng.normal(size=16), rng.normal(size=16)
    assert cosine(a, b) == pytest.approx(cosine(3.5 * a, b), abs=1e-12)


# -- cache -----------------------------------------------------------------

def test_cache_round_trip(tmp_path):
    path = tmp_path / "cache.json"
    cache = EmbeddingCache(path)
    assert cache.get("m", "text") is None
    cache.put("m", "text", np.array([1.0, 2.0]))
    cache.flush()
    reloaded = EmbeddingCache(path)
    assert len(reloaded) == 1
    np.testing.assert_array_equal(reloaded.get("m", "text"), [1.0, 2.0])
    assert reloaded.get("other-model", "text") is None


# -- remote client against a live local endpoint ---------------------------

class _FakeEmbeddings(BaseHTTPRequestHandler):
    """Echo-ish embeddings endpoint recording every request it serves."""

    requests: list[dict] = []
    headers_seen: list[dict] = []
    status = 200
    dim = 8
    short_count = False

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        type(self).requests.append(body)
        type(self).headers_seen.append(dict(self.headers))
        if type(self).status != 200:
            self.send_response(type(self).status)
            self.end_headers()
            return
        inputs = body["input"]
        if type(self).short_count:
            inputs = inputs[:-1]
        data = [{"embedding": [float(i + 1)] * type(self).dim, "index": i}
                for i, _ in enumerate(inputs)]
        payload = json.dumps({"data": data}).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def fake_server():
    _FakeEmbeddings.requests = []
    _FakeEmbeddings.headers_seen = []
    _FakeEmbeddings.status = 200
    _FakeEmbeddings.dim = 8
    _FakeEmbeddings.short_count = False
    server = HTTPServer(("127.0.0.1", 0), _FakeEmbeddings)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}/embeddings"
    server.shutdown()
    thread.join(timeout=5)


def remote_spec(url, **kw) -> EmbedderSpec:
    return EmbedderSpec(kind=EmbedderKind.REMOTE_HTTP, dim=8, endpoint_url=url,
                        model_name="test-embed", **kw)


def test_remote_wire_format(fake_server):
    emb = RemoteHttpEmbedder(remote_spec(fake_server))
    vectors = emb.embed_batch(["first", "second"])
    assert [v.tolist() for v in vectors] == [[1.0] * 8, [2.0] * 8]
    request, = _FakeEmbeddings.requests
    assert request == {"model": "test-embed", "input": ["first", "second"]}


def test_remote_sends_bearer_token(fake_server, monkeypatch):
    monkeypatch.setenv("TEST_EMBED_KEY", "sekrit")
    emb = RemoteHttpEmbedder(remote_spec(fake_server, auth_env_var="TEST_EMBED_KEY"))
    emb.embed_text("hello")
    assert _FakeEmbeddings.headers_seen[0]["Authorization"] == "Bearer sekrit"


def test_remote_no_token_no_header(fake_server, monkeypatch):
    monkeypatch.delenv("TEST_EMBED_KEY", raising=False)
    emb = RemoteHttpEmbedder(remote_spec(fake_server, auth_env_var="TEST_EMBED_KEY"))
    emb.embed_text("hello")
    assert "Authorization" not in _FakeEmbeddings.headers_seen[0]


def test_remote_http_error_carries_status(fake_server):
    _FakeEmbeddings.status = 503
    emb = RemoteHttpEmbedder(remote_spec(fake_server))
    with pytest.raises(EmbeddingError) as exc_info:
        emb.embed_text("hello")
    assert exc_info.value.status == 503


def test_remote_count_mismatch_raises(fake_server):
    _FakeEmbeddings.short_count = True
    emb = RemoteHttpEmbedder(remote_spec(fake_server))
    with pytest.raises(EmbeddingError, match="2 vectors for 3"):
        emb.embed_batch(["a", "b", "c"])


def test_remote_dim_mismatch_names_index(fake_server):
    _FakeEmbeddings.dim = 6
    emb = RemoteHttpEmbedder(remote_spec(fake_server))
    with pytest.raises(EmbeddingError) as exc_info:
        emb.embed_batch(["a"])
    assert exc_info.value.index == 0


def test_remote_connection_refused():
    emb = RemoteHttpEmbedder(remote_spec("http://127.0.0.1:9/embeddings"),
                             timeout=0.5)
    with pytest.raises(EmbeddingError):
        emb.embed_text("hello")


def test_cache_skips_second_fetch(fake_server, tmp_path):
    cache = EmbeddingCache(tmp_path / "cache.json")
    emb = RemoteHttpEmbedder(remote_spec(fake_server), cache=cache)
    first = emb.embed_text("cached text")
    assert len(_FakeEmbeddings.requests) == 1
    second = emb.embed_text("cached text")
    assert len(_FakeEmbeddings.requests) == 1, "second call must hit the cache"
    np.testing.assert_array_equal(first, second)
    # A fresh client sees the flushed entries too.
    again = RemoteHttpEmbedder(remote_spec(fake_server),
                               cache=EmbeddingCache(tmp_path / "cache.json"))
    again.embed_text("cached text")
    assert len(_FakeEmbeddings.requests) == 1


def test_build_embedder_dispatch(fake_server):
    assert isinstance(build_embedder(local_spec()), LocalHashEmbedder)
    remote = build_embedder(remote_spec(fake_server))
    assert isinstance(remote, RemoteHttpEmbedder)
    assert remote.cache is None


def test_module_embed_batch_wraps_index(fake_server):
    _FakeEmbeddings.status = 500
    with pytest.raises(EmbeddingError) as exc_info:
        embed_batch(remote_spec(fake_server), ["a", "b"])
    assert exc_info.value.index == 0
    assert exc_info.value.status == 500
