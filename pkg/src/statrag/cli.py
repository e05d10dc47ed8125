"""Command-line entry point.

Subcommands cover the whole lifecycle: ingest a corpus into chunks,
build or extend the index, ask one-shot questions, evaluate a dataset,
benchmark the two retrieval strategies, and run the HTTP service.
Reports land as JSON or CSV with a rendered chart next to them unless
figures are switched off.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import (ConfigError, ServiceConfig, build_engine,
                     build_index_from_corpus, load_config, load_documents)
from .corpus import CorpusError, chunk_corpus, load_corpus
from .embed import EmbeddingError, build_embedder
from .evalsuite import (bench_strategies, load_external_scores,
                        load_qa_dataset, run_eval, write_bench_csv)
from .index import (DuplicateChunkError, FingerprintMismatchError,
                    IndexFormatError, load_index)
from .pipeline import GenerationError, RoutingError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

_RUNTIME_ERRORS = (ConfigError, CorpusError, EmbeddingError, GenerationError,
                   IndexFormatError, FingerprintMismatchError,
                   DuplicateChunkError, RoutingError, OSError, ValueError)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this tool reserves 2 for runtime."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="statrag",
                     description="Jurisdiction-aware retrieval QA engine.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to config JSON")
        return p

    p = add("ingest", "load the corpus and write its chunks as JSON lines")
    p.add_argument("--out", help="output path (default: stdout)")

    add("index", "build the vector index from the corpus and save it")

    p = add("append", "embed new documents and add them to the saved index")
    p.add_argument("docs", help="directory or manifest of documents to add")

    p = add("query", "answer a single question")
    p.add_argument("question")
    p.add_argument("--strategy", choices=["auto", "wdi", "swi"], default="auto")
    p.add_argument("--k", type=int)
    p.add_argument("--json", action="store_true", dest="as_json",
                   help="print the full answer object instead of the text")

    p = add("eval", "run a Q&A dataset and score the answers")
    p.add_argument("--dataset", required=True, help="JSON-lines Q&A file")
    p.add_argument("--out", default="eval_report.json")
    p.add_argument("--external", help="JSON sidecar of external metric scores")
    p.add_argument("--no-figures", action="store_true")

    p = add("bench", "time each query under both retrieval strategies")
    p.add_argument("--queries", required=True, help="text file, one query per line")
    p.add_argument("--strategy", choices=["auto", "wdi", "swi"], default="auto",
                   help="auto compares both; wdi/swi restricts to one")
    p.add_argument("--k", type=int)
    p.add_argument("--out", default="bench.csv")
    p.add_argument("--no-figures", action="store_true")

    p = add("serve", "run the HTTP service")
    p.add_argument("--bind", help="host:port (overrides config)")

    return parser


def _cmd_ingest(config: ServiceConfig, args) -> int:
    documents = load_documents(config)
    chunks = chunk_corpus(documents, config.chunk_max_chars,
                          config.chunk_overlap_chars)
    lines = [json.dumps(c.to_dict(), sort_keys=True) for c in chunks]
    if args.out:
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"wrote {len(chunks)} chunks from {len(documents)} documents "
              f"to {args.out}")
    else:
        for line in lines:
            print(line)
    return EXIT_OK


def _cmd_index(config: ServiceConfig, args) -> int:
    if not config.index_path:
        raise ConfigError("index_path is not configured")
    index = build_index_from_corpus(config)
    Path(config.index_path).parent.mkdir(parents=True, exist_ok=True)
    index.save(config.index_path)
    print(f"indexed {index.chunk_count} chunks across "
          f"{index.partition_count} partitions -> {config.index_path}")
    return EXIT_OK


def _cmd_append(config: ServiceConfig, args) -> int:
    if not config.index_path or not Path(config.index_path).exists():
        raise ConfigError("no saved index to append to; run `statrag index` first")
    index = load_index(config.index_path)
    documents = load_corpus(args.docs)
    chunks = chunk_corpus(documents, config.chunk_max_chars,
                          config.chunk_overlap_chars)
    embedder = build_embedder(config.embedder, config.embed_cache_path or None)
    index.append(chunks, embedder)
    index.save(config.index_path)
    print(f"appended {len(chunks)} chunks from {len(documents)} documents; "
          f"index now holds {index.chunk_count}")
    return EXIT_OK


def _cmd_query(config: ServiceConfig, args) -> int:
    engine = build_engine(config)
    answer = engine.answer_query(args.question, strategy=args.strategy, k=args.k)
    if args.as_json:
        print(json.dumps(answer.to_dict(), indent=2))
    else:
        print(answer.text)
        if answer.sources:
            print("\nSources:")
            for ref in answer.sources:
                print(f"  {ref.citation} ({ref.doc_id}) score={ref.score:.3f}")
    return EXIT_OK


def _figure_path(out: str) -> Path:
    return Path(out).with_suffix(".png")


def _cmd_eval(config: ServiceConfig, args) -> int:
    dataset = load_qa_dataset(args.dataset)
    external = load_external_scores(args.external) if args.external else None
    engine = build_engine(config)
    report = run_eval(dataset, engine, external)
    report.save(args.out)
    rouge = report.means["rouge_l"]
    embed = report.means["embed_score"]
    print(f"evaluated {len(report.per_record)} records "
          f"({len(report.excluded)} excluded)")
    print(f"rouge_l      P={rouge.precision:.4f} R={rouge.recall:.4f} "
          f"F1={rouge.f1:.4f}")
    print(f"embed_score  P={embed.precision:.4f} R={embed.recall:.4f} "
          f"F1={embed.f1:.4f}")
    print(f"report -> {args.out}")
    if not args.no_figures:
        from .figures import render_eval_figure
        figure = render_eval_figure(report, _figure_path(args.out))
        print(f"figure -> {figure}")
    return EXIT_OK


def _cmd_bench(config: ServiceConfig, args) -> int:
    queries = [line.strip() for line in
               Path(args.queries).read_text(encoding="utf-8").splitlines()
               if line.strip()]
    if not queries:
        raise ConfigError(f"no queries found in {args.queries}")
    engine = build_engine(config)
    strategies = ("wdi", "swi") if args.strategy == "auto" else (args.strategy,)
    rows = bench_strategies(queries, engine, strategies=strategies, k=args.k)
    write_bench_csv(rows, args.out)
    print(f"benchmarked {len(queries)} queries -> {args.out}")
    if not args.no_figures:
        from .figures import render_bench_figure
        figure = render_bench_figure(rows, _figure_path(args.out))
        print(f"figure -> {figure}")
    return EXIT_OK


def _cmd_serve(config: ServiceConfig, args) -> int:
    if args.bind:
        from dataclasses import replace
        config = replace(config, bind_address=args.bind)
        config.bind_host_port()
    from .service import serve
    serve(config)
    return EXIT_OK


_COMMANDS = {
    "ingest": _cmd_ingest,
    "index": _cmd_index,
    "append": _cmd_append,
    "query": _cmd_query,
    "eval": _cmd_eval,
    "bench": _cmd_bench,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "k", None) is not None and args.k < 1:
        print("statrag: error: --k must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        config = load_config(args.config)
        return _COMMANDS[args.command](config, args)
    except _RUNTIME_ERRORS as exc:
        print(f"statrag: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
