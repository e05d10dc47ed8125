"""Corpus loading and chunking.

Documents live on disk as ``<root>/<Jurisdiction>/<Topic>/<name>.txt`` where
the jurisdiction directory is "Federal", "International", or one of the 50
canonical U.S. state names. A ``corpus.json`` manifest can override the
path-derived metadata. Chunking is sentence-aware with a configurable
character budget and overlap; offsets are counted in Unicode code points.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

log = logging.getLogger(__name__)

US_STATES: tuple[str, ...] = (
    "Alabama", "Alaska", "Arizona", "Arkansas", "California", "Colorado",
    "Connecticut", "Delaware", "Florida", "Georgia", "Hawaii", "Idaho",
    "Illinois", "Indiana", "Iowa", "Kansas", "Kentucky", "Louisiana",
    "Maine", "Maryland", "Massachusetts", "Michigan", "Minnesota",
    "Mississippi", "Missouri", "Montana", "Nebraska", "Nevada",
    "New Hampshire", "New Jersey", "New Mexico", "New York",
    "North Carolina", "North Dakota", "Ohio", "Oklahoma", "Oregon",
    "Pennsylvania", "Rhode Island", "South Carolina", "South Dakota",
    "Tennessee", "Texas", "Utah", "Vermont", "Virginia", "Washington",
    "West Virginia", "Wisconsin", "Wyoming",
)

_STATE_BY_LOWER = {name.lower(): name for name in US_STATES}

# Characters that end a sentence when followed by whitespace (or end of text).
_BOUNDARY_CHARS = frozenset(".?!\n")


class CorpusError(Exception):
    """Raised when a corpus directory or manifest cannot be ingested."""


class JurisdictionKind(str, Enum):
    FEDERAL = "Federal"
    STATE = "State"
    INTERNATIONAL = "International"


def canonical_state(name: str) -> str | None:
    """Canonical spelling for a state name, or None if unknown. Case-insensitive."""
    return _STATE_BY_LOWER.get(name.strip().lower())


@dataclass(frozen=True)
class Jurisdiction:
    """Federal, International, or a single U.S. state (canonical spelling)."""

    kind: JurisdictionKind
    name: str | None = None

    def __post_init__(self) -> None:
        if self.kind is JurisdictionKind.STATE:
            if self.name is None or self.name not in US_STATES:
                raise ValueError(f"not a canonical state name: {self.name!r}")
        elif self.name is not None:
            raise ValueError(f"{self.kind.value} jurisdiction carries no state name")

    @classmethod
    def federal(cls) -> "Jurisdiction":
        return cls(JurisdictionKind.FEDERAL)

    @classmethod
    def international(cls) -> "Jurisdiction":
        return cls(JurisdictionKind.INTERNATIONAL)

    @classmethod
    def state(cls, name: str) -> "Jurisdiction":
        canonical = canonical_state(name)
        if canonical is None:
            raise ValueError(f"unknown state: {name!r}")
        return cls(JurisdictionKind.STATE, canonical)

    @classmethod
    def parse(cls, label: str) -> "Jurisdiction":
        """Parse a directory or config label ("Federal", "Alabama", ...)."""
        stripped = label.strip()
        lowered = stripped.lower()
        if lowered == "federal":
            return cls.federal()
        if lowered == "international":
            return cls.international()
        canonical = canonical_state(stripped)
        if canonical is None:
            raise ValueError(f"unknown jurisdiction: {stripped}")
        return cls(JurisdictionKind.STATE, canonical)

    @property
    def label(self) -> str:
        """Display/storage label: the state name, or "Federal"/"International"."""
        return self.name if self.name is not None else self.kind.value

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "name": self.name}

    @classmethod
    def from_dict(cls, data: dict) -> "Jurisdiction":
        return cls(JurisdictionKind(data["kind"]), data.get("name"))


@dataclass(frozen=True)
class Document:
    """One legislative text. ``citation`` is the first non-empty line of the file."""

    doc_id: str
    jurisdiction: Jurisdiction
    topic: str
    citation: str
    body: str
    source_path: str


@dataclass(frozen=True)
class Chunk:
    """A contiguous slice of a document body; the unit stored in the vector index."""

    chunk_id: str
    doc_id: str
    ordinal: int
    start_char: int
    end_char: int
    text: str
    jurisdiction: Jurisdiction

    def to_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "doc_id": self.doc_id,
            "ordinal": self.ordinal,
            "start_char": self.start_char,
            "end_char": self.end_char,
            "text": self.text,
            "jurisdiction": self.jurisdiction.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Chunk":
        return cls(
            chunk_id=data["chunk_id"],
            doc_id=data["doc_id"],
            ordinal=data["ordinal"],
            start_char=data["start_char"],
            end_char=data["end_char"],
            text=data["text"],
            jurisdiction=Jurisdiction.from_dict(data["jurisdiction"]),
        )


def _first_nonempty_line(text: str) -> str:
    for line in text.splitlines():
        stripped = line.strip()
        if stripped:
            return stripped
    return ""


def _read_document(path: Path, rel_path: str, jurisdiction: Jurisdiction,
                   topic: str, citation: str | None = None) -> Document | None:
    """Read one file into a Document; None when the body is effectively empty."""
    try:
        body = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusError(f"not valid UTF-8: {path}") from exc
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    if not body.strip():
        log.warning("skipping empty document: %s", path)
        return None
    return Document(
        doc_id=rel_path.replace("\\", "/"),
        jurisdiction=jurisdiction,
        topic=topic,
        citation=citation if citation else _first_nonempty_line(body),
        source_path=str(path),
        body=body,
    )


def _load_manifest_entries(manifest_path: Path) -> list[dict]:
    try:
        entries = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise CorpusError(f"bad manifest {manifest_path}: {exc}") from exc
    if not isinstance(entries, list):
        raise CorpusError(f"bad manifest {manifest_path}: expected a JSON array")
    return entries


def _load_from_manifest(manifest_path: Path) -> list[Document]:
    base = manifest_path.parent
    docs: list[Document] = []
    for entry in _load_manifest_entries(manifest_path):
        try:
            rel = entry["path"]
            jurisdiction = Jurisdiction.parse(entry["jurisdiction"])
            topic = entry["topic"]
        except (KeyError, TypeError) as exc:
            raise CorpusError(f"manifest entry missing field: {entry!r}") from exc
        except ValueError as exc:
            raise CorpusError(str(exc)) from exc
        path = base / rel
        if not path.is_file():
            raise CorpusError(f"manifest names a missing file: {path}")
        doc = _read_document(path, rel, jurisdiction, topic, entry.get("citation"))
        if doc is not None:
            docs.append(doc)
    return docs


def _scan_layout(root: Path) -> list[Document]:
    docs: list[Document] = []
    for path in sorted(root.rglob("*.txt")):
        rel_parts = path.relative_to(root).parts
        if len(rel_parts) < 3:
            raise CorpusError(
                f"file outside <jurisdiction>/<topic>/ layout: {path}")
        try:
            jurisdiction = Jurisdiction.parse(rel_parts[0])
        except ValueError as exc:
            raise CorpusError(f"{exc} (at {path})") from exc
        rel = "/".join(rel_parts)
        doc = _read_document(path, rel, jurisdiction, rel_parts[1])
        if doc is not None:
            docs.append(doc)
    return docs


def load_corpus(root: str | Path) -> list[Document]:
    """Load a document collection from a layout directory or a manifest file.

    A directory is scanned for ``<Jurisdiction>/<Topic>/*.txt``; a
    ``corpus.json`` inside it overrides path-derived metadata per file.
    A file argument is treated as a manifest and loads exactly its entries.
    Empty files are skipped with a logged warning; unknown jurisdiction
    directories and non-UTF-8 files raise :class:`CorpusError`.
    """
    root = Path(root)
    if root.is_file():
        return _check_unique(_load_from_manifest(root))
    if not root.is_dir():
        raise CorpusError(f"corpus root does not exist: {root}")

    docs = _scan_layout(root)
    manifest = root / "corpus.json"
    if manifest.is_file():
        overrides = {e.get("path"): e for e in _load_manifest_entries(manifest)}
        patched = []
        for doc in docs:
            entry = overrides.get(doc.doc_id)
            if entry is None:
                patched.append(doc)
                continue
            try:
                jurisdiction = Jurisdiction.parse(entry["jurisdiction"])
                topic = entry["topic"]
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"bad manifest entry for {doc.doc_id}: {exc}") from exc
            patched.append(Document(
                doc_id=doc.doc_id,
                jurisdiction=jurisdiction,
                topic=topic,
                citation=entry.get("citation") or doc.citation,
                body=doc.body,
                source_path=doc.source_path,
            ))
        docs = patched

    return _check_unique(docs)


def _check_unique(docs: list[Document]) -> list[Document]:
    seen: set[str] = set()
    for doc in docs:
        if doc.doc_id in seen:
            raise CorpusError(f"duplicate doc_id: {doc.doc_id}")
        seen.add(doc.doc_id)
    return docs


def _find_split(body: str, start: int, limit: int) -> int:
    """End offset for the chunk starting at ``start``, at most ``limit``.

    Prefers the last sentence boundary (".", "?", "!" or newline followed by
    whitespace or end of text), then the last whitespace, then a hard cut.
    """
    for i in range(limit - 1, start - 1, -1):
        if body[i] in _BOUNDARY_CHARS and (i + 1 == len(body) or body[i + 1].isspace()):
            return i + 1
    for i in range(limit - 1, start - 1, -1):
        if body[i].isspace():
            return i + 1
    return limit


def chunk_document(doc: Document, max_chars: int = 1000,
                   overlap_chars: int = 200) -> list[Chunk]:
    """Split a document body into overlapping, sentence-aware chunks."""
    if max_chars < 1:
        raise ValueError("max_chars must be >= 1")
    if not 0 <= overlap_chars < max_chars:
        raise ValueError("overlap_chars must satisfy 0 <= overlap < max_chars")

    body = doc.body
    n = len(body)
    chunks: list[Chunk] = []
    start = 0
    ordinal = 0
    while start < n:
        if n - start <= max_chars:
            end = n
        else:
            end = _find_split(body, start, start + max_chars)
        chunks.append(Chunk(
            chunk_id=f"{doc.doc_id}#{ordinal}",
            doc_id=doc.doc_id,
            ordinal=ordinal,
            start_char=start,
            end_char=end,
            text=body[start:end],
            jurisdiction=doc.jurisdiction,
        ))
        if end == n:
            break
        start = max(end - overlap_chars, start + 1)
        ordinal += 1
    return chunks


def chunk_corpus(docs: list[Document], max_chars: int = 1000,
                 overlap_chars: int = 200) -> list[Chunk]:
    """Chunk every document, preserving document order."""
    out: list[Chunk] = []
    for doc in docs:
        out.extend(chunk_document(doc, max_chars, overlap_chars))
    return out
