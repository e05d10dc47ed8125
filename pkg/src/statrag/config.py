"""Configuration loading and engine assembly.

One JSON document describes a deployment: where the corpus and index
live, which embedder and generator to use, and the retrieval knobs.
Scalar fields can be overridden through ``STATRAG_``-prefixed
environment variables so auth tokens and ports never need to be edited
into the file itself.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .corpus import chunk_corpus, load_corpus
from .embed import EmbedderKind, EmbedderSpec, build_embedder
from .index import VectorIndex, build_index, load_index
from .pipeline import (DEFAULT_K, DEFAULT_TEMPLATE, DEFAULT_THRESHOLD,
                       GeneratorSpec, QueryEngine, build_citation_catalog,
                       validate_template)
from .router import load_adjacency, load_aliases

log = logging.getLogger(__name__)

ENV_PREFIX = "STATRAG_"

# Floor for configured chunk sizes; chunk_document itself accepts smaller
# values so the splitting rules stay testable on tiny strings.
MIN_CONFIG_CHUNK_CHARS = 64


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ServiceConfig:
    corpus_root: str = ""
    index_path: str = ""
    embedder: EmbedderSpec = EmbedderSpec(kind=EmbedderKind.LOCAL_HASH)
    generator: GeneratorSpec = GeneratorSpec()
    k: int = DEFAULT_K
    threshold: float = DEFAULT_THRESHOLD
    swi_enabled: bool = True
    include_federal: bool = False
    aliases_path: str = ""
    adjacency_path: str = ""
    prompt_template_path: str = ""
    embed_cache_path: str = ""
    bind_address: str = "127.0.0.1:8000"
    chunk_max_chars: int = 1000
    chunk_overlap_chars: int = 200

    def bind_host_port(self) -> tuple[str, int]:
        host, sep, port = self.bind_address.rpartition(":")
        if not sep or not host:
            raise ConfigError(f"bind_address must be host:port, got {self.bind_address!r}")
        try:
            return host, int(port)
        except ValueError as exc:
            raise ConfigError(f"bind_address port is not a number: {port!r}") from exc


_SCALAR_FIELDS = {f.name: f.type for f in fields(ServiceConfig)
                  if f.name not in ("embedder", "generator")}

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _parse_bool(raw: str, name: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in _BOOL_TRUE:
        return True
    if lowered in _BOOL_FALSE:
        return False
    raise ConfigError(f"{name}: expected a boolean, got {raw!r}")


def _check_scalar_types(config: ServiceConfig) -> None:
    """Dataclasses do not enforce annotations; a config file can put a
    string where an int belongs and the error would surface much later."""
    for name, annotation in _SCALAR_FIELDS.items():
        value = getattr(config, name)
        if annotation == "bool":
            ok = isinstance(value, bool)
        elif annotation == "int":
            ok = isinstance(value, int) and not isinstance(value, bool)
        elif annotation == "float":
            ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        else:
            ok = isinstance(value, str)
        if not ok:
            raise ConfigError(f"{name}: expected {annotation}, got {value!r}")


def _apply_env_overrides(config: ServiceConfig, environ) -> ServiceConfig:
    updates = {}
    for name in _SCALAR_FIELDS:
        raw = environ.get(ENV_PREFIX + name.upper())
        if raw is None:
            continue
        current = getattr(config, name)
        if isinstance(current, bool):
            updates[name] = _parse_bool(raw, name)
        elif isinstance(current, int):
            try:
                updates[name] = int(raw)
            except ValueError as exc:
                raise ConfigError(f"{name}: expected an integer, got {raw!r}") from exc
        elif isinstance(current, float):
            try:
                updates[name] = float(raw)
            except ValueError as exc:
                raise ConfigError(f"{name}: expected a number, got {raw!r}") from exc
        else:
            updates[name] = raw
    return replace(config, **updates) if updates else config


def _resolve(base: Path, value: str) -> str:
    if not value:
        return value
    path = Path(value)
    return str(path if path.is_absolute() else base / path)


def load_config(path: str | Path, environ=None) -> ServiceConfig:
    """Parse and validate a config file; relative paths follow the file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")

    known = {f.name for f in fields(ServiceConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {', '.join(sorted(unknown))}")

    kwargs = dict(data)
    try:
        if "embedder" in kwargs:
            kwargs["embedder"] = EmbedderSpec.from_dict(kwargs["embedder"])
        if "generator" in kwargs:
            kwargs["generator"] = GeneratorSpec.from_dict(kwargs["generator"])
        config = ServiceConfig(**kwargs)
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    _check_scalar_types(config)

    base = path.parent
    config = replace(
        config,
        corpus_root=_resolve(base, config.corpus_root),
        index_path=_resolve(base, config.index_path),
        aliases_path=_resolve(base, config.aliases_path),
        adjacency_path=_resolve(base, config.adjacency_path),
        prompt_template_path=_resolve(base, config.prompt_template_path),
        embed_cache_path=_resolve(base, config.embed_cache_path))
    config = _apply_env_overrides(config, environ if environ is not None else os.environ)
    validate_config(config)
    return config


def validate_config(config: ServiceConfig) -> None:
    if config.k < 1:
        raise ConfigError("k must be >= 1")
    if not 0.0 <= config.threshold <= 1.0:
        raise ConfigError("threshold must lie in [0, 1]")
    if config.chunk_max_chars < MIN_CONFIG_CHUNK_CHARS:
        raise ConfigError(f"chunk_max_chars must be >= {MIN_CONFIG_CHUNK_CHARS}")
    if not 0 <= config.chunk_overlap_chars < config.chunk_max_chars:
        raise ConfigError("chunk_overlap_chars must be >= 0 and < chunk_max_chars")
    config.bind_host_port()
    for label, value in (("aliases_path", config.aliases_path),
                         ("adjacency_path", config.adjacency_path),
                         ("prompt_template_path", config.prompt_template_path)):
        if value and not Path(value).exists():
            raise ConfigError(f"{label} does not exist: {value}")


def load_documents(config: ServiceConfig):
    if not config.corpus_root:
        raise ConfigError("corpus_root is not configured")
    if not Path(config.corpus_root).exists():
        raise ConfigError(f"corpus_root does not exist: {config.corpus_root}")
    return load_corpus(config.corpus_root)


def build_index_from_corpus(config: ServiceConfig, embedder=None) -> VectorIndex:
    documents = load_documents(config)
    chunks = chunk_corpus(documents, config.chunk_max_chars,
                          config.chunk_overlap_chars)
    if embedder is None:
        embedder = build_embedder(config.embedder, config.embed_cache_path or None)
    return build_index(chunks, embedder)


def _load_or_build_index(config: ServiceConfig, embedder) -> VectorIndex:
    if config.index_path and Path(config.index_path).exists():
        index = load_index(config.index_path)
        if index.embedder_fingerprint != embedder.spec.fingerprint:
            raise ConfigError(
                f"index at {config.index_path} was built with "
                f"{index.embedder_fingerprint!r}, but the configured embedder is "
                f"{embedder.spec.fingerprint!r}; rebuild the index")
        return index
    if not config.corpus_root:
        raise ConfigError("no index file and no corpus_root to build one from")
    log.info("index not found, building from %s", config.corpus_root)
    index = build_index_from_corpus(config, embedder)
    if config.index_path:
        Path(config.index_path).parent.mkdir(parents=True, exist_ok=True)
        index.save(config.index_path)
    return index


def build_engine(config: ServiceConfig, clock=time.perf_counter,
                 on_prompt=None) -> QueryEngine:
    """Assemble a ready-to-query engine from a validated config.

    Anything that can fail from bad configuration fails here, before the
    first query: missing files, placeholder-free templates, or an index
    written by a different embedder.
    """
    embedder = build_embedder(config.embedder, config.embed_cache_path or None)
    index = _load_or_build_index(config, embedder)

    citations: dict[str, str] = {}
    if config.corpus_root and Path(config.corpus_root).exists():
        citations = build_citation_catalog(load_corpus(config.corpus_root))

    template = DEFAULT_TEMPLATE
    if config.prompt_template_path:
        template = Path(config.prompt_template_path).read_text(encoding="utf-8")
    try:
        validate_template(template)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    aliases = load_aliases(config.aliases_path) if config.aliases_path else None
    adjacency = (load_adjacency(config.adjacency_path)
                 if config.adjacency_path else None)

    return QueryEngine(
        index=index, embedder=embedder, generator=config.generator,
        citations=citations, template=template, k=config.k,
        threshold=config.threshold, swi_enabled=config.swi_enabled,
        include_federal=config.include_federal,
        aliases=aliases, adjacency=adjacency, clock=clock, on_prompt=on_prompt)
