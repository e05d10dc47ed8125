"""Embedding backends and vector similarity.

Two embedders share one interface: a deterministic hashed bag-of-words
("local_hash") that needs no network and makes every test reproducible,
and an HTTP client ("remote_http") speaking the common embeddings-API
wire shape, with responses cached on disk by content hash.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
import requests

_FNV64_OFFSET = 0xCBF29CE484222325
_FNV64_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

# Alphanumeric runs (unicode letters and digits, underscore excluded).
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class EmbeddingError(Exception):
    """Embedding failure; ``status`` carries the HTTP status when remote."""

    def __init__(self, message: str, status: int | None = None,
                 index: int | None = None):
        super().__init__(message)
        self.status = status
        self.index = index


class EmbedderKind(str, Enum):
    LOCAL_HASH = "local_hash"
    REMOTE_HTTP = "remote_http"


@dataclass(frozen=True)
class EmbedderSpec:
    kind: EmbedderKind
    dim: int = 256
    endpoint_url: str = ""
    model_name: str = ""
    auth_env_var: str = ""

    def __post_init__(self) -> None:
        if self.dim < 8:
            raise ValueError("embedding dim must be >= 8")
        if self.kind is EmbedderKind.REMOTE_HTTP and not self.endpoint_url:
            raise ValueError("remote_http embedder requires endpoint_url")

    @property
    def fingerprint(self) -> str:
        return f"{self.kind.value}:{self.model_name}:{self.dim}"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "dim": self.dim,
            "endpoint_url": self.endpoint_url,
            "model_name": self.model_name,
            "auth_env_var": self.auth_env_var,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EmbedderSpec":
        return cls(
            kind=EmbedderKind(data["kind"]),
            dim=data.get("dim", 256),
            endpoint_url=data.get("endpoint_url", ""),
            model_name=data.get("model_name", ""),
            auth_env_var=data.get("auth_env_var", ""),
        )


def fnv1a64(text: str) -> int:
    """64-bit FNV-1a over the UTF-8 bytes of ``text``."""
    h = _FNV64_OFFSET
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * _FNV64_PRIME) & _MASK64
    return h


def tokenize(text: str) -> list[str]:
    """Lowercase and split into alphanumeric runs."""
    return _TOKEN_RE.findall(text.lower())


class LocalHashEmbedder:
    """Hashed bag-of-words: token counts scattered by FNV-1a, L2-normalized."""

    def __init__(self, spec: EmbedderSpec):
        self.spec = spec
        self.dim = spec.dim

    def embed_text(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in tokenize(text):
            vec[fnv1a64(token) % self.dim] += 1.0
        norm = np.linalg.norm(vec)
        if norm > 0.0:
            vec /= norm
        return vec

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        return [self.embed_text(t) for t in texts]


class EmbeddingCache:
    """On-disk JSON cache keyed by sha256(model, text).

    Single writer, many readers; identical keys are last-write-wins.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: dict[str, list[float]] = {}
        if self.path.is_file():
            self._entries = json.loads(self.path.read_text(encoding="utf-8"))

    @staticmethod
    def key(model_name: str, text: str) -> str:
        digest = hashlib.sha256()
        digest.update(model_name.encode("utf-8"))
        digest.update(b"\x00")
        digest.update(text.encode("utf-8"))
        return digest.hexdigest()

    def get(self, model_name: str, text: str) -> np.ndarray | None:
        values = self._entries.get(self.key(model_name, text))
        if values is None:
            return None
        return np.asarray(values, dtype=np.float64)

    def put(self, model_name: str, text: str, vector: np.ndarray) -> None:
        with self._lock:
            self._entries[self.key(model_name, text)] = [float(v) for v in vector]

    def flush(self) -> None:
        with self._lock:
            tmp = self.path.with_suffix(self.path.suffix + ".tmp")
            tmp.write_text(json.dumps(self._entries), encoding="utf-8")
            tmp.replace(self.path)

    def __len__(self) -> int:
        return len(self._entries)


class RemoteHttpEmbedder:
    """Client for a POST {"model", "input": [...]} -> {"data": [{"embedding"}...]} endpoint."""

    def __init__(self, spec: EmbedderSpec, cache: EmbeddingCache | None = None,
                 timeout: float = 30.0):
        self.spec = spec
        self.dim = spec.dim
        self.cache = cache
        self.timeout = timeout
        self._session = requests.Session()

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.spec.auth_env_var:
            token = os.environ.get(self.spec.auth_env_var, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def _fetch(self, texts: list[str]) -> list[np.ndarray]:
        payload = {"model": self.spec.model_name, "input": texts}
        try:
            resp = self._session.post(self.spec.endpoint_url, json=payload,
                                      headers=self._headers(), timeout=self.timeout)
        except requests.RequestException as exc:
            raise EmbeddingError(f"embedding request failed: {exc}") from exc
        if resp.status_code != 200:
            raise EmbeddingError(
                f"embedding endpoint returned HTTP {resp.status_code}",
                status=resp.status_code)
        try:
            rows = resp.json()["data"]
            vectors = [np.asarray(row["embedding"], dtype=np.float64) for row in rows]
        except (ValueError, KeyError, TypeError) as exc:
            raise EmbeddingError(f"malformed embedding response: {exc}") from exc
        if len(vectors) != len(texts):
            raise EmbeddingError(
                f"embedding endpoint returned {len(vectors)} vectors for "
                f"{len(texts)} inputs")
        for i, vec in enumerate(vectors):
            if vec.shape != (self.dim,):
                raise EmbeddingError(
                    f"provider returned dim {vec.shape[0] if vec.ndim == 1 else vec.shape}"
                    f" for input {i}, expected {self.dim}", index=i)
        return vectors

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        if not texts:
            return []
        out: list[np.ndarray | None] = [None] * len(texts)
        missing: list[int] = []
        if self.cache is not None:
            for i, text in enumerate(texts):
                cached = self.cache.get(self.spec.model_name, text)
                if cached is not None:
                    out[i] = cached
                else:
                    missing.append(i)
        else:
            missing = list(range(len(texts)))
        if missing:
            fetched = self._fetch([texts[i] for i in missing])
            for i, vec in zip(missing, fetched):
                out[i] = vec
                if self.cache is not None:
                    self.cache.put(self.spec.model_name, texts[i], vec)
            if self.cache is not None:
                self.cache.flush()
        return [v for v in out if v is not None]

    def embed_text(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]


def build_embedder(spec: EmbedderSpec, cache_path: str | Path | None = None):
    """Construct the embedder for a spec; remote gets a disk cache when given a path."""
    if spec.kind is EmbedderKind.LOCAL_HASH:
        return LocalHashEmbedder(spec)
    cache = EmbeddingCache(cache_path) if cache_path is not None else None
    return RemoteHttpEmbedder(spec, cache=cache)


def _as_embedder(spec_or_embedder):
    if isinstance(spec_or_embedder, EmbedderSpec):
        return build_embedder(spec_or_embedder)
    return spec_or_embedder


def embed_text(spec_or_embedder, text: str) -> np.ndarray:
    return _as_embedder(spec_or_embedder).embed_text(text)


def embed_batch(spec_or_embedder, texts: list[str]) -> list[np.ndarray]:
    embedder = _as_embedder(spec_or_embedder)
    out = []
    for i, text in enumerate(texts):
        try:
            out.append(embedder.embed_text(text))
        except EmbeddingError as exc:
            raise EmbeddingError(f"batch failed at index {i}: {exc}",
                                 status=exc.status, index=i) from exc
    return out


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return float(np.dot(a, b) / (norm_a * norm_b))
