"""CLI behavior: exit codes, file outputs, and rendered figures.

Everything goes through ``main(argv)`` so the tests see exactly what a
shell invocation would, minus the process boundary.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from statrag import (BENCH_CSV_HEADER, BENCH_UNROUTABLE, build_index,
                     load_index)
from statrag.cli import main
from statrag.evalsuite import BenchRow
from statrag.figures import render_bench_figure, render_eval_figure

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


@pytest.fixture
def config_path(tmp_path, fixtures_dir):
    data = {
        "corpus_root": str(fixtures_dir / "corpus"),
        "index_path": str(tmp_path / "statutes.index"),
        "embedder": {"kind": "local_hash", "dim": 256},
        "k": 5,
        "threshold": 0.25,
        "adjacency_path": str(fixtures_dir / "adjacency.json"),
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


# -- usage errors (exit 1) -------------------------------------------------

def test_no_subcommand(capsys):
    assert main([]) == 1
    assert "error" in capsys.readouterr().err


def test_unknown_subcommand(capsys):
    assert main(["transmogrify"]) == 1


def test_missing_config_flag(capsys):
    assert main(["index"]) == 1


def test_k_below_one(config_path, capsys):
    assert main(["query", "--config", config_path, "--k", "0", "q"]) == 1
    assert "--k must be >= 1" in capsys.readouterr().err


# -- runtime errors (exit 2) -----------------------------------------------

def test_unreadable_config(tmp_path, capsys):
    assert main(["index", "--config", str(tmp_path / "nope.json")]) == 2
    assert capsys.readouterr().err.startswith("statrag: cannot read config")


def test_forced_swi_without_states(config_path, capsys):
    code = main(["query", "--config", config_path, "--strategy", "swi",
                 "what is a computer"])
    assert code == 2
    assert "no states named" in capsys.readouterr().err


def test_append_without_saved_index(config_path, fixtures_dir, capsys):
    code = main(["append", "--config", config_path,
                 str(fixtures_dir / "corpus")])
    assert code == 2
    assert "statrag index" in capsys.readouterr().err


# -- ingest ----------------------------------------------------------------

def test_ingest_stdout(config_path, chunks, capsys):
    assert main(["ingest", "--config", config_path]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == len(chunks)
    first = json.loads(lines[0])
    assert set(first) == {"chunk_id", "doc_id", "jurisdiction", "text",
                          "ordinal", "start_char", "end_char"}


def test_ingest_to_file(config_path, tmp_path, chunks, capsys):
    out = tmp_path / "chunks.jsonl"
    assert main(["ingest", "--config", config_path, "--out", str(out)]) == 0
    assert len(out.read_text(encoding="utf-8").splitlines()) == len(chunks)
    assert f"wrote {len(chunks)} chunks" in capsys.readouterr().out


# -- index / append --------------------------------------------------------

def test_index_build_matches_library(config_path, tmp_path, chunks, embedder,
                                     capsys):
    assert main(["index", "--config", config_path]) == 0
    assert "indexed 25 chunks" in capsys.readouterr().out

    via_library = tmp_path / "library.index"
    build_index(chunks, embedder).save(via_library)
    built = Path(json.loads(Path(config_path).read_text())["index_path"])
    assert built.read_bytes() == via_library.read_bytes()


def test_index_build_is_repeatable(config_path, capsys):
    main(["index", "--config", config_path])
    built = Path(json.loads(Path(config_path).read_text())["index_path"])
    first = built.read_bytes()
    main(["index", "--config", config_path])
    assert built.read_bytes() == first


def test_append_extends_saved_index(config_path, tmp_path, capsys):
    main(["index", "--config", config_path])
    extra = tmp_path / "extra" / "Nevada" / "Gaming Act"
    extra.mkdir(parents=True)
    (extra / "463-010.txt").write_text(
        "Nev. Rev. Stat. 463.010\nShort title of the gaming control act.\n",
        encoding="utf-8")

    code = main(["append", "--config", config_path, str(tmp_path / "extra")])
    assert code == 0
    assert "appended 1 chunks" in capsys.readouterr().out
    index_path = json.loads(Path(config_path).read_text())["index_path"]
    index = load_index(index_path)
    assert index.chunk_count == 26
    assert "Nevada" in [j.label for j in index.partition_sizes()]


# -- query -----------------------------------------------------------------

def test_query_text_output(config_path, capsys):
    code = main(["query", "--config", config_path,
                 "What are the penalties in Ohio and Oklahoma?"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("Looking into the following state(s): Ohio, Oklahoma")
    assert "\nSources:\n" in out
    assert "score=" in out


def test_query_json_output(config_path, capsys):
    code = main(["query", "--config", config_path, "--json", "--k", "2",
                 "--strategy", "wdi", "Ohio breach notification deadlines"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["strategy"]["strategy"] == "wdi"
    assert len(payload["sources"]) <= 2


# -- eval ------------------------------------------------------------------

def mini_dataset(tmp_path, fixtures_dir, n=3):
    lines = (fixtures_dir / "qa_dataset.jsonl").read_text(
        encoding="utf-8").splitlines()[:n]
    path = tmp_path / "mini.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def test_eval_writes_report_and_figure(config_path, tmp_path, fixtures_dir,
                                       capsys):
    out = tmp_path / "report.json"
    code = main(["eval", "--config", config_path,
                 "--dataset", mini_dataset(tmp_path, fixtures_dir),
                 "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert len(report["per_record"]) == 3
    assert report["means"]["rouge_l"]["f1"] > 0.99

    figure = tmp_path / "report.png"
    assert figure.read_bytes().startswith(PNG_MAGIC)

    printed = capsys.readouterr().out
    assert "evaluated 3 records (0 excluded)" in printed
    assert "rouge_l" in printed
    assert f"figure -> {figure}" in printed


def test_eval_no_figures(config_path, tmp_path, fixtures_dir, capsys):
    out = tmp_path / "report.json"
    code = main(["eval", "--config", config_path,
                 "--dataset", mini_dataset(tmp_path, fixtures_dir),
                 "--out", str(out), "--no-figures"])
    assert code == 0
    assert out.exists()
    assert not (tmp_path / "report.png").exists()


def test_eval_missing_dataset(config_path, tmp_path, capsys):
    code = main(["eval", "--config", config_path,
                 "--dataset", str(tmp_path / "absent.jsonl")])
    assert code == 2


def test_eval_external_scores_merged(config_path, tmp_path, fixtures_dir):
    sidecar = tmp_path / "external.json"
    sidecar.write_text(json.dumps({"qa001": {"bert_f1": 0.93}}),
                       encoding="utf-8")
    out = tmp_path / "report.json"
    code = main(["eval", "--config", config_path,
                 "--dataset", mini_dataset(tmp_path, fixtures_dir),
                 "--out", str(out), "--external", str(sidecar),
                 "--no-figures"])
    assert code == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    by_id = {r["id"]: r for r in report["per_record"]}
    assert by_id["qa001"]["external"] == {"bert_f1": 0.93}


# -- bench -----------------------------------------------------------------

def test_bench_writes_csv_and_figure(config_path, tmp_path, capsys):
    queries = tmp_path / "queries.txt"
    queries.write_text("Ohio breach law\nwhat is a computer\n",
                       encoding="utf-8")
    out = tmp_path / "bench.csv"
    code = main(["bench", "--config", config_path,
                 "--queries", str(queries), "--out", str(out)])
    assert code == 0

    with out.open(encoding="utf-8", newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == BENCH_CSV_HEADER
    assert len(rows) == 1 + 4  # two queries under two strategies
    swi_stateless = [r for r in rows[1:]
                     if r[0] == "what is a computer" and r[1] == "swi"]
    assert swi_stateless[0][2] == BENCH_UNROUTABLE
    assert (tmp_path / "bench.png").read_bytes().startswith(PNG_MAGIC)


def test_bench_single_strategy(config_path, tmp_path, capsys):
    queries = tmp_path / "queries.txt"
    queries.write_text("Ohio breach law\n", encoding="utf-8")
    out = tmp_path / "bench.csv"
    code = main(["bench", "--config", config_path, "--queries", str(queries),
                 "--strategy", "wdi", "--out", str(out), "--no-figures"])
    assert code == 0
    with out.open(encoding="utf-8", newline="") as handle:
        rows = list(csv.reader(handle))
    assert [r[1] for r in rows[1:]] == ["wdi"]


def test_bench_rejects_empty_query_file(config_path, tmp_path, capsys):
    queries = tmp_path / "queries.txt"
    queries.write_text("\n\n", encoding="utf-8")
    assert main(["bench", "--config", config_path,
                 "--queries", str(queries)]) == 2
    assert "no queries found" in capsys.readouterr().err


def test_bench_fixture_queries(config_path, fixtures_dir, tmp_path):
    out = tmp_path / "bench.csv"
    code = main(["bench", "--config", config_path,
                 "--queries", str(fixtures_dir / "bench_queries.txt"),
                 "--out", str(out), "--no-figures"])
    assert code == 0
    with out.open(encoding="utf-8", newline="") as handle:
        rows = list(csv.reader(handle))
    assert len(rows) == 1 + 10  # five fixture queries, both strategies


# -- serve (validation only; the server itself would block) ----------------

def test_serve_rejects_bad_bind(config_path, capsys):
    code = main(["serve", "--config", config_path, "--bind", "nohost"])
    assert code == 2
    assert "host:port" in capsys.readouterr().err


# -- figures, called directly ---------------------------------------------

def test_render_eval_figure(tmp_path, fixtures_dir, engine):
    from statrag import load_qa_dataset, run_eval
    dataset = load_qa_dataset(fixtures_dir / "qa_dataset.jsonl")[:4]
    report = run_eval(dataset, engine)
    path = render_eval_figure(report, tmp_path / "eval.png")
    assert path == tmp_path / "eval.png"
    assert path.read_bytes().startswith(PNG_MAGIC)


def test_render_bench_figure_skips_unroutable(tmp_path):
    rows = [
        BenchRow(query="q1", strategy="wdi", latency_ms=1.5,
                 partitions_scanned=4, states_identified=()),
        BenchRow(query="q1", strategy="swi", latency_ms=None,
                 partitions_scanned=None, states_identified=(),
                 note=BENCH_UNROUTABLE),
    ]
    path = render_bench_figure(rows, tmp_path / "bench.png")
    assert path.read_bytes().startswith(PNG_MAGIC)
