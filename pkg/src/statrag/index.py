"""Jurisdiction-partitioned vector index with exact top-k search.

The store is a flat per-partition matrix searched exhaustively — at the
corpus sizes this engine targets, exact cosine over a few thousand chunks
is faster than maintaining an approximate structure, and it keeps ranking
reproducible. Persistence is a single JSON-lines file: a header line, one
record per chunk, and a trailing CRC-32 over everything above it.
"""

from __future__ import annotations

import json
import logging
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Chunk, Jurisdiction
from .embed import EmbedderSpec, EmbeddingError, build_embedder

log = logging.getLogger(__name__)

FORMAT_VERSION = 1


class IndexFormatError(Exception):
    """Malformed or corrupt index file; ``line`` is the offending record line."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class IndexChecksumError(IndexFormatError):
    """CRC mismatch — the file is truncated or was modified."""


class FingerprintMismatchError(Exception):
    """Appending with a different embedder than the index was built with."""


class DuplicateChunkError(Exception):
    pass


@dataclass(frozen=True)
class ScoredChunk:
    chunk: Chunk
    score: float
    rank: int


class SearchHits(list):
    """Search results plus the restricted jurisdictions that had no partition."""

    def __init__(self, hits, missing_jurisdictions=()):
        super().__init__(hits)
        self.missing_jurisdictions: tuple[Jurisdiction, ...] = tuple(missing_jurisdictions)


class _Partition:
    """Chunks of one jurisdiction and their stacked embedding matrix."""

    def __init__(self, dim: int):
        self.dim = dim
        self.chunks: list[Chunk] = []
        self.matrix = np.empty((0, dim), dtype=np.float64)
        self.norms = np.empty(0, dtype=np.float64)

    def extend(self, chunks: list[Chunk], vectors: list[np.ndarray]) -> None:
        if not chunks:
            return
        block = np.vstack([np.asarray(v, dtype=np.float64) for v in vectors])
        self.matrix = np.vstack([self.matrix, block]) if len(self.chunks) else block
        self.norms = np.linalg.norm(self.matrix, axis=1)
        self.chunks.extend(chunks)

    def __len__(self) -> int:
        return len(self.chunks)


class VectorIndex:
    """Map of jurisdiction -> (chunks, vectors), searchable with exact cosine."""

    def __init__(self, dim: int, embedder_fingerprint: str):
        self.dim = dim
        self.embedder_fingerprint = embedder_fingerprint
        self._partitions: dict[Jurisdiction, _Partition] = {}
        self._chunk_ids: set[str] = set()

    # -- introspection ----------------------------------------------------

    @property
    def partitions(self) -> tuple[Jurisdiction, ...]:
        return tuple(self._partitions)

    @property
    def partition_count(self) -> int:
        return len(self._partitions)

    @property
    def chunk_count(self) -> int:
        return len(self._chunk_ids)

    def partition_sizes(self) -> dict[Jurisdiction, int]:
        return {j: len(p) for j, p in self._partitions.items()}

    def __contains__(self, chunk_id: str) -> bool:
        return chunk_id in self._chunk_ids

    def entries(self):
        """Yield (chunk, vector) over all partitions in storage order."""
        for part in self._partitions.values():
            for i, chunk in enumerate(part.chunks):
                yield chunk, part.matrix[i]

    # -- construction -----------------------------------------------------

    def _add(self, chunks: list[Chunk], vectors: list[np.ndarray]) -> None:
        for chunk, vec in zip(chunks, vectors):
            if chunk.chunk_id in self._chunk_ids:
                raise DuplicateChunkError(f"duplicate chunk_id: {chunk.chunk_id}")
            if np.asarray(vec).shape != (self.dim,):
                raise EmbeddingError(
                    f"vector for {chunk.chunk_id} has wrong dimension")
        by_jurisdiction: dict[Jurisdiction, tuple[list, list]] = {}
        for chunk, vec in zip(chunks, vectors):
            bucket = by_jurisdiction.setdefault(chunk.jurisdiction, ([], []))
            bucket[0].append(chunk)
            bucket[1].append(vec)
            self._chunk_ids.add(chunk.chunk_id)
        for jurisdiction, (cs, vs) in by_jurisdiction.items():
            part = self._partitions.setdefault(jurisdiction, _Partition(self.dim))
            part.extend(cs, vs)

    def append(self, chunks: list[Chunk], embedder_or_spec) -> "VectorIndex":
        """Embed and add new chunks in place; the embedder must match the index."""
        embedder = _resolve_embedder(embedder_or_spec)
        if embedder.spec.fingerprint != self.embedder_fingerprint:
            raise FingerprintMismatchError(
                f"index was built with {self.embedder_fingerprint!r} but got "
                f"{embedder.spec.fingerprint!r}; run a full rebuild to change embedders")
        if not chunks:
            return self
        vectors = _embed_chunks(embedder, chunks)
        self._add(chunks, vectors)
        return self

    # -- search -----------------------------------------------------------

    def search(self, query_vector: np.ndarray, k: int,
               restrict: set[Jurisdiction] | None = None) -> SearchHits:
        """Exact top-k by cosine over the restricted partitions (all when None).

        Ties are broken by ascending chunk_id so ranks are a total order.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        query = np.asarray(query_vector, dtype=np.float64)
        if query.shape != (self.dim,):
            raise ValueError(
                f"query dimension {query.shape} does not match index dim {self.dim}")
        query_norm = float(np.linalg.norm(query))

        if restrict is None:
            parts = list(self._partitions.values())
            missing: list[Jurisdiction] = []
        else:
            parts = []
            missing = []
            for jurisdiction in sorted(restrict, key=lambda j: j.label):
                part = self._partitions.get(jurisdiction)
                if part is None or len(part) == 0:
                    missing.append(jurisdiction)
                else:
                    parts.append(part)

        scored: list[tuple[float, str, Chunk]] = []
        for part in parts:
            if len(part) == 0:
                continue
            if query_norm == 0.0:
                scores = np.zeros(len(part))
            else:
                dots = part.matrix @ query
                denom = part.norms * query_norm
                with np.errstate(invalid="ignore", divide="ignore"):
                    scores = np.where(denom > 0.0, dots / denom, 0.0)
            for i, chunk in enumerate(part.chunks):
                scored.append((float(scores[i]), chunk.chunk_id, chunk))

        scored.sort(key=lambda t: (-t[0], t[1]))
        hits = [ScoredChunk(chunk=c, score=s, rank=r + 1)
                for r, (s, _, c) in enumerate(scored[:k])]
        if missing:
            log.debug("restricted jurisdictions with no partition: %s",
                      [j.label for j in missing])
        return SearchHits(hits, missing)

    # -- persistence ------------------------------------------------------

    def save(self, path: str | Path) -> None:
        """Write the versioned JSON-lines format with a trailing CRC-32."""
        path = Path(path)
        lines = [json.dumps(
            {"version": FORMAT_VERSION, "dim": self.dim,
             "fingerprint": self.embedder_fingerprint},
            sort_keys=True, separators=(",", ":"))]
        for chunk, vector in self.entries():
            record = chunk.to_dict()
            record["embedding"] = [float(v) for v in vector]
            lines.append(json.dumps(record, sort_keys=True, separators=(",", ":")))
        payload = ("\n".join(lines) + "\n").encode("utf-8")
        crc = zlib.crc32(payload) & 0xFFFFFFFF
        trailer = json.dumps({"crc32": f"{crc:08x}"}, separators=(",", ":"))
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(payload + trailer.encode("utf-8") + b"\n")
        tmp.replace(path)


def _resolve_embedder(embedder_or_spec):
    if isinstance(embedder_or_spec, EmbedderSpec):
        return build_embedder(embedder_or_spec)
    return embedder_or_spec


def _embed_chunks(embedder, chunks: list[Chunk]) -> list[np.ndarray]:
    try:
        return embedder.embed_batch([c.text for c in chunks])
    except EmbeddingError as exc:
        failing = chunks[exc.index].chunk_id if exc.index is not None else "<batch>"
        raise EmbeddingError(
            f"embedding failed at chunk {failing}: {exc}", status=exc.status) from exc


def build_index(chunks: list[Chunk], spec_or_embedder,
                cache_path: str | Path | None = None) -> VectorIndex:
    """Embed every chunk and place it in its jurisdiction partition."""
    if isinstance(spec_or_embedder, EmbedderSpec):
        embedder = build_embedder(spec_or_embedder, cache_path)
    else:
        embedder = spec_or_embedder
    index = VectorIndex(embedder.spec.dim, embedder.spec.fingerprint)
    if chunks:
        vectors = _embed_chunks(embedder, chunks)
        index._add(chunks, vectors)
    return index


def save_index(index: VectorIndex, path: str | Path) -> None:
    index.save(path)


def load_index(path: str | Path) -> VectorIndex:
    """Load and verify a saved index; any corruption raises, never a partial index."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise IndexFormatError(f"cannot read index file: {exc}") from exc

    lines = raw.split(b"\n")
    while lines and lines[-1] == b"":
        lines.pop()
    if len(lines) < 2:
        raise IndexFormatError("index file too short to contain header and checksum")

    trailer_raw = lines[-1]
    payload = b"\n".join(lines[:-1]) + b"\n"
    try:
        trailer = json.loads(trailer_raw)
        stored_crc = trailer["crc32"]
    except (ValueError, KeyError, TypeError) as exc:
        raise IndexChecksumError(
            f"missing or malformed checksum trailer: {exc}",
            line=len(lines)) from exc
    actual_crc = f"{zlib.crc32(payload) & 0xFFFFFFFF:08x}"
    if actual_crc != stored_crc:
        raise IndexChecksumError(
            f"checksum mismatch: stored {stored_crc}, computed {actual_crc}")

    try:
        header = json.loads(lines[0])
        version = header["version"]
        dim = header["dim"]
        fingerprint = header["fingerprint"]
    except (ValueError, KeyError, TypeError) as exc:
        raise IndexFormatError(f"malformed header: {exc}", line=1) from exc
    if version != FORMAT_VERSION:
        raise IndexFormatError(
            f"unsupported index version {version} (expected {FORMAT_VERSION})", line=1)

    index = VectorIndex(dim, fingerprint)
    chunks: list[Chunk] = []
    vectors: list[np.ndarray] = []
    for line_no, line in enumerate(lines[1:-1], start=2):
        try:
            record = json.loads(line)
            embedding = np.asarray(record.pop("embedding"), dtype=np.float64)
            chunk = Chunk.from_dict(record)
        except (ValueError, KeyError, TypeError) as exc:
            raise IndexFormatError(f"malformed record: {exc}", line=line_no) from exc
        if embedding.shape != (dim,):
            raise IndexFormatError(
                f"record has dim {embedding.shape}, expected {dim}", line=line_no)
        chunks.append(chunk)
        vectors.append(embedding)
    try:
        index._add(chunks, vectors)
    except DuplicateChunkError as exc:
        raise IndexFormatError(str(exc)) from exc
    return index


def append_documents(index: VectorIndex, chunks: list[Chunk],
                     spec_or_embedder) -> VectorIndex:
    """Incrementally extend an index; cheap as long as the embedder is unchanged."""
    return index.append(chunks, spec_or_embedder)


def search(index: VectorIndex, query_vector: np.ndarray, k: int,
           restrict: set[Jurisdiction] | None = None) -> SearchHits:
    return index.search(query_vector, k, restrict)
