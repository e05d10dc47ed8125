from __future__ import annotations

import json
import zlib

import numpy as np
import pytest

from statrag import (Chunk, DuplicateChunkError, EmbedderKind, EmbedderSpec,
                     FingerprintMismatchError, IndexChecksumError,
                     IndexFormatError, Jurisdiction, LocalHashEmbedder,
                     append_documents, build_index, cosine, load_index,
                     save_index)


def make_chunk(i: int, label: str, text: str) -> Chunk:
    return Chunk(chunk_id=f"{label}/doc-{i:03d}.txt#0", doc_id=f"{label}/doc-{i:03d}.txt",
                 ordinal=0, start_char=0, end_char=len(text), text=text,
                 jurisdiction=Jurisdiction.parse(label))


def small_embedder(dim=32) -> LocalHashEmbedder:
    return LocalHashEmbedder(EmbedderSpec(kind=EmbedderKind.LOCAL_HASH, dim=dim))


@pytest.fixture
def small_chunks():
    words = ["breach notice", "computer crime", "tax filing", "water rights",
             "breach penalty", "computer access"]
    labels = ["Ohio", "Ohio", "Kansas", "Kansas", "Texas", "Federal"]
    return [make_chunk(i, lab, f"{w} statute text {i}")
            for i, (w, lab) in enumerate(zip(words, labels))]


def brute_force(index, embedder, query: str, restrict=None):
    """Reference ranking: per-pair cosine, sorted by (-score, chunk_id)."""
    qv = embedder.embed_text(query)
    rows = []
    for chunk, vec in index.entries():
        if restrict is not None and chunk.jurisdiction not in restrict:
            continue
        rows.append((cosine(qv, vec), chunk.chunk_id))
    rows.sort(key=lambda t: (-t[0], t[1]))
    return rows


# -- construction and search ----------------------------------------------

def test_build_partitions_by_jurisdiction(small_chunks):
    index = build_index(small_chunks, small_embedder())
    assert index.chunk_count == 6
    assert index.partition_count == 4
    sizes = {j.label: n for j, n in index.partition_sizes().items()}
    assert sizes == {"Ohio": 2, "Kansas": 2, "Texas": 1, "Federal": 1}
    assert small_chunks[0].chunk_id in index
    assert "nope#0" not in index


def test_search_agrees_with_linear_scan(corpus_index, embedder):
    for query in ("data breach notification deadline",
                  "computer tampering felony",
                  "rail passenger service"):
        expected = brute_force(corpus_index, embedder, query)
        hits = corpus_index.search(embedder.embed_text(query), k=10)
        assert [h.chunk.chunk_id for h in hits] == [cid for _, cid in expected[:10]]
        for hit, (score, _) in zip(hits, expected):
            assert hit.score == pytest.approx(score, abs=1e-12)
        assert [h.rank for h in hits] == list(range(1, len(hits) + 1))


def test_ties_break_on_ascending_chunk_id():
    emb = small_embedder()
    clones = [make_chunk(i, "Ohio", "identical text") for i in (3, 1, 2)]
    index = build_index(clones, emb)
    hits = index.search(emb.embed_text("identical text"), k=3)
    assert [h.chunk.chunk_id for h in hits] == sorted(c.chunk_id for c in clones)
    assert len({h.score for h in hits}) == 1


def test_k_validation_and_clipping(small_chunks):
    emb = small_embedder()
    index = build_index(small_chunks, emb)
    qv = emb.embed_text("statute")
    with pytest.raises(ValueError):
        index.search(qv, k=0)
    assert len(index.search(qv, k=100)) == 6
    assert len(index.search(qv, k=2)) == 2


def test_restrict_filters_and_reports_missing(small_chunks):
    emb = small_embedder()
    index = build_index(small_chunks, emb)
    qv = emb.embed_text("breach statute")
    restrict = {Jurisdiction.state("Ohio"), Jurisdiction.state("California")}
    hits = index.search(qv, k=10, restrict=restrict)
    assert {h.chunk.jurisdiction.label for h in hits} == {"Ohio"}
    assert [j.label for j in hits.missing_jurisdictions] == ["California"]
    none_left = index.search(qv, k=10, restrict={Jurisdiction.state("Wyoming")})
    assert list(none_left) == []
    assert [j.label for j in none_left.missing_jurisdictions] == ["Wyoming"]


def test_zero_query_vector_scores_zero(small_chunks):
    index = build_index(small_chunks, small_embedder())
    hits = index.search(np.zeros(32), k=3)
    assert len(hits) == 3
    assert all(h.score == 0.0 for h in hits)


def test_query_dim_mismatch(small_chunks):
    index = build_index(small_chunks, small_embedder())
    with pytest.raises(ValueError, match="dimension"):
        index.search(np.zeros(16), k=1)


def test_duplicate_chunk_rejected(small_chunks):
    emb = small_embedder()
    index = build_index(small_chunks, emb)
    with pytest.raises(DuplicateChunkError):
        index.append([small_chunks[0]], emb)


def test_append_requires_matching_fingerprint(small_chunks):
    index = build_index(small_chunks, small_embedder(dim=32))
    with pytest.raises(FingerprintMismatchError, match="rebuild"):
        index.append([make_chunk(99, "Iowa", "new text")], small_embedder(dim=64))


def test_empty_build_and_search():
    index = build_index([], small_embedder())
    assert index.chunk_count == 0
    assert list(index.search(np.zeros(32), k=5)) == []


# -- persistence -----------------------------------------------------------

def test_save_load_round_trip(tmp_path, small_chunks):
    emb = small_embedder()
    index = build_index(small_chunks, emb)
    path = tmp_path / "test.index"
    save_index(index, path)
    loaded = load_index(path)
    assert loaded.dim == index.dim
    assert loaded.embedder_fingerprint == index.embedder_fingerprint
    assert loaded.chunk_count == index.chunk_count
    qv = emb.embed_text("breach statute")
    original = [(h.chunk.chunk_id, h.score) for h in index.search(qv, k=6)]
    reloaded = [(h.chunk.chunk_id, h.score) for h in loaded.search(qv, k=6)]
    assert original == reloaded


def test_save_is_deterministic(tmp_path, small_chunks):
    index = build_index(small_chunks, small_embedder())
    a, b = tmp_path / "a.index", tmp_path / "b.index"
    save_index(index, a)
    save_index(index, b)
    assert a.read_bytes() == b.read_bytes()
    save_index(load_index(a), b)
    assert a.read_bytes() == b.read_bytes()


def test_append_equals_rebuild(tmp_path, small_chunks):
    emb = small_embedder()
    extra = [make_chunk(i, lab, f"amendment text {i}")
             for i, lab in ((10, "Ohio"), (11, "Iowa"), (12, "Federal"))]

    incremental = build_index(small_chunks, emb)
    append_documents(incremental, extra, emb)
    rebuilt = build_index(small_chunks + extra, emb)

    inc_path, full_path = tmp_path / "inc.index", tmp_path / "full.index"
    save_index(incremental, inc_path)
    save_index(rebuilt, full_path)
    assert inc_path.read_bytes() == full_path.read_bytes()


def test_header_and_trailer_shape(tmp_path, small_chunks):
    path = tmp_path / "test.index"
    save_index(build_index(small_chunks, small_embedder()), path)
    lines = path.read_text(encoding="utf-8").splitlines()
    header = json.loads(lines[0])
    assert header == {"version": 1, "dim": 32,
                      "fingerprint": "local_hash::32"}
    trailer = json.loads(lines[-1])
    assert set(trailer) == {"crc32"}
    payload = ("\n".join(lines[:-1]) + "\n").encode("utf-8")
    assert trailer["crc32"] == f"{zlib.crc32(payload) & 0xFFFFFFFF:08x}"
    assert len(lines) == 2 + 6


def test_flipped_byte_fails_checksum(tmp_path, small_chunks):
    path = tmp_path / "test.index"
    save_index(build_index(small_chunks, small_embedder()), path)
    raw = bytearray(path.read_bytes())
    target = raw.index(b"statute")
    raw[target] ^= 0x20
    path.write_bytes(bytes(raw))
    with pytest.raises(IndexChecksumError):
        load_index(path)


def test_truncated_file_fails_checksum(tmp_path, small_chunks):
    path = tmp_path / "test.index"
    save_index(build_index(small_chunks, small_embedder()), path)
    lines = path.read_bytes().split(b"\n")
    path.write_bytes(b"\n".join(lines[:4]) + b"\n")
    with pytest.raises(IndexChecksumError):
        load_index(path)


def test_unsupported_version_rejected(tmp_path):
    header = json.dumps({"dim": 32, "fingerprint": "local_hash::32",
                         "version": 9}, sort_keys=True, separators=(",", ":"))
    payload = (header + "\n").encode("utf-8")
    crc = f"{zlib.crc32(payload) & 0xFFFFFFFF:08x}"
    path = tmp_path / "v9.index"
    path.write_bytes(payload + json.dumps({"crc32": crc}).encode() + b"\n")
    with pytest.raises(IndexFormatError, match="version 9") as exc_info:
        load_index(path)
    assert exc_info.value.line == 1


def test_malformed_record_names_line(tmp_path, small_chunks):
    path = tmp_path / "test.index"
    save_index(build_index(small_chunks[:2], small_embedder()), path)
    lines = path.read_bytes().split(b"\n")
    lines[2] = b'{"oops": true}'
    payload = b"\n".join(lines[:-2]) + b"\n"
    crc = f"{zlib.crc32(payload) & 0xFFFFFFFF:08x}"
    path.write_bytes(payload + json.dumps({"crc32": crc}).encode() + b"\n")
    with pytest.raises(IndexFormatError) as exc_info:
        load_index(path)
    assert exc_info.value.line == 3


def test_missing_file(tmp_path):
    with pytest.raises(IndexFormatError):
        load_index(tmp_path / "ghost.index")
