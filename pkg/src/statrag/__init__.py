"""Retrieval-augmented question answering over jurisdiction-partitioned statutes."""

from .corpus import (Chunk, CorpusError, Document, Jurisdiction,
                     JurisdictionKind, US_STATES, canonical_state,
                     chunk_corpus, chunk_document, load_corpus)
from .embed import (EmbedderKind, EmbedderSpec, EmbeddingCache, EmbeddingError,
                    LocalHashEmbedder, RemoteHttpEmbedder, build_embedder,
                    cosine, embed_batch, embed_text, fnv1a64, tokenize)
from .index import (DuplicateChunkError, FingerprintMismatchError,
                    IndexChecksumError, IndexFormatError, ScoredChunk,
                    SearchHits, VectorIndex, append_documents, build_index,
                    load_index, save_index)
from .router import (RoutingDecision, Strategy, expand_neighbors,
                     extract_states, load_adjacency, load_aliases, route)
from .pipeline import (Answer, DEFAULT_TEMPLATE, GenerationError,
                       GeneratorKind, GeneratorSpec, QueryEngine,
                       RoutingError, SENTINEL, Section, SourceRef, Timings,
                       assemble_prompt, build_citation_catalog, generate,
                       swi_header, validate_template)
from .evalsuite import (BENCH_CSV_HEADER, BENCH_UNROUTABLE, BenchRow,
                        EvalReport, MetricScores, QARecord, RecordResult,
                        bench_strategies, config_fingerprint,
                        greedy_embed_score, load_external_scores,
                        load_qa_dataset, rouge_l, run_eval, tokenize_eval,
                        write_bench_csv)
from .config import (ConfigError, ServiceConfig, build_engine,
                     build_index_from_corpus, load_config, load_documents,
                     validate_config)
from .figures import render_bench_figure, render_eval_figure
from .service import create_app

__version__ = "0.1.0"

__all__ = [
    "Answer", "BENCH_CSV_HEADER", "BENCH_UNROUTABLE", "BenchRow", "Chunk",
    "ConfigError", "CorpusError",
    "DEFAULT_TEMPLATE", "Document", "DuplicateChunkError", "EmbedderKind",
    "EmbedderSpec", "EmbeddingCache", "EmbeddingError", "EvalReport",
    "FingerprintMismatchError", "GenerationError", "GeneratorKind",
    "GeneratorSpec", "IndexChecksumError", "IndexFormatError",
    "Jurisdiction", "JurisdictionKind", "LocalHashEmbedder", "MetricScores",
    "QARecord", "QueryEngine", "RecordResult", "RemoteHttpEmbedder",
    "RoutingDecision", "RoutingError", "SENTINEL", "ScoredChunk",
    "SearchHits", "Section", "ServiceConfig", "SourceRef", "Strategy",
    "Timings", "US_STATES", "VectorIndex", "append_documents",
    "assemble_prompt", "bench_strategies", "build_citation_catalog",
    "build_embedder", "build_engine", "build_index",
    "build_index_from_corpus", "canonical_state", "chunk_corpus",
    "chunk_document", "config_fingerprint", "cosine", "create_app",
    "embed_batch", "embed_text", "expand_neighbors", "extract_states",
    "fnv1a64", "generate", "greedy_embed_score", "load_adjacency",
    "load_aliases", "load_config", "load_corpus", "load_documents",
    "load_external_scores", "load_index", "load_qa_dataset",
    "render_bench_figure", "render_eval_figure", "rouge_l", "route",
    "run_eval", "save_index", "swi_header", "tokenize", "tokenize_eval",
    "validate_config", "validate_template", "write_bench_csv",
]
