"""Answer scoring and dataset evaluation.

Two reference metrics are built in: ROUGE-L over a shared tokenizer and
a greedy embedding-matching score that pairs each candidate token with
its most similar reference token. Trained-model metrics are out of
scope; their scores can be merged from a JSON sidecar instead so a
report can still carry them side by side.
"""

from __future__ import annotations

import csv
import json
import logging
import unicodedata
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embed import EmbedderSpec, build_embedder
from .pipeline import QueryEngine, RoutingError

log = logging.getLogger(__name__)

BENCH_CSV_HEADER = ["query", "strategy", "latency_ms",
                    "partitions_scanned", "states_identified"]
BENCH_UNROUTABLE = "n/a (no states named)"


@dataclass(frozen=True)
class QARecord:
    id: str
    question: str
    reference_answer: str
    expected_states: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("record id must be non-empty")
        if not self.question or not self.reference_answer:
            raise ValueError(f"record {self.id}: question and reference_answer "
                             "must be non-empty")


@dataclass(frozen=True)
class MetricScores:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "MetricScores":
        if precision + recall == 0:
            return cls(precision, recall, 0.0)
        f1 = 2.0 * precision * recall / (precision + recall)
        return cls(precision, recall, f1)

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}

    @classmethod
    def from_dict(cls, data: dict) -> "MetricScores":
        return cls(float(data["precision"]), float(data["recall"]), float(data["f1"]))


@dataclass(frozen=True)
class RecordResult:
    id: str
    strategy: str = ""
    latency_ms: float = 0.0
    rouge_l: MetricScores | None = None
    embed_score: MetricScores | None = None
    routing_correct: bool | None = None
    external: dict | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "strategy": self.strategy,
            "latency_ms": self.latency_ms,
            "rouge_l": self.rouge_l.to_dict() if self.rouge_l else None,
            "embed_score": self.embed_score.to_dict() if self.embed_score else None,
            "routing_correct": self.routing_correct,
            "external": self.external,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RecordResult":
        return cls(
            id=data["id"], strategy=data.get("strategy", ""),
            latency_ms=float(data.get("latency_ms", 0.0)),
            rouge_l=MetricScores.from_dict(data["rouge_l"]) if data.get("rouge_l") else None,
            embed_score=(MetricScores.from_dict(data["embed_score"])
                         if data.get("embed_score") else None),
            routing_correct=data.get("routing_correct"),
            external=data.get("external"),
            error=data.get("error"))


@dataclass(frozen=True)
class EvalReport:
    per_record: tuple[RecordResult, ...]
    means: dict[str, MetricScores]
    config_fingerprint: str
    excluded: tuple[str, ...] = ()

    def to_json(self) -> str:
        payload = {
            "config_fingerprint": self.config_fingerprint,
            "per_record": [r.to_dict() for r in self.per_record],
            "means": {name: m.to_dict() for name, m in sorted(self.means.items())},
            "excluded": list(self.excluded),
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        data = json.loads(text)
        return cls(
            per_record=tuple(RecordResult.from_dict(r) for r in data["per_record"]),
            means={name: MetricScores.from_dict(m)
                   for name, m in data["means"].items()},
            config_fingerprint=data["config_fingerprint"],
            excluded=tuple(data.get("excluded", ())))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "EvalReport":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def tokenize_eval(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip punctuation off token edges."""
    tokens = []
    for raw in text.lower().split():
        start = 0
        end = len(raw)
        while start < end and unicodedata.category(raw[start]).startswith("P"):
            start += 1
        while end > start and unicodedata.category(raw[end - 1]).startswith("P"):
            end -= 1
        if end > start:
            tokens.append(raw[start:end])
    return tokens


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    # One row of the DP table at a time; b is the inner dimension.
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        ai = a[i - 1]
        for j in range(1, len(b) + 1):
            if ai == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = cur[j - 1] if cur[j - 1] >= prev[j] else prev[j]
        prev = cur
    return prev[len(b)]


def rouge_l(candidate: str, reference: str) -> MetricScores:
    """Longest-common-subsequence overlap between token lists, F1-balanced."""
    cand = tokenize_eval(candidate)
    ref = tokenize_eval(reference)
    lcs = _lcs_length(cand, ref)
    precision = lcs / len(cand) if cand else 0.0
    recall = lcs / len(ref) if ref else 0.0
    return MetricScores.from_pr(precision, recall)


def greedy_embed_score(candidate: str, reference: str, spec_or_embedder) -> MetricScores:
    """Greedy token-matching similarity with a pluggable embedder.

    Each candidate token is credited with its best cosine against any
    reference token (precision side); recall mirrors it. No idf
    weighting is applied.
    """
    embedder = (build_embedder(spec_or_embedder)
                if isinstance(spec_or_embedder, EmbedderSpec) else spec_or_embedder)
    cand = tokenize_eval(candidate)
    ref = tokenize_eval(reference)
    if not cand or not ref:
        return MetricScores(0.0, 0.0, 0.0)

    memo: dict[str, np.ndarray] = {}

    def rows(tokens: list[str]) -> np.ndarray:
        out = []
        for token in tokens:
            vec = memo.get(token)
            if vec is None:
                vec = np.asarray(embedder.embed_text(token), dtype=np.float64)
                memo[token] = vec
            out.append(vec)
        return np.vstack(out)

    c = rows(cand)
    r = rows(ref)
    c_norms = np.linalg.norm(c, axis=1)
    r_norms = np.linalg.norm(r, axis=1)
    sims = c @ r.T
    denom = np.outer(c_norms, r_norms)
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = np.where(denom > 0.0, sims / denom, 0.0)
    precision = float(np.mean(np.max(sims, axis=1)))
    recall = float(np.mean(np.max(sims, axis=0)))
    return MetricScores.from_pr(precision, recall)


def load_qa_dataset(path: str | Path) -> list[QARecord]:
    """Read a JSON-lines Q&A dataset, one record per line."""
    records: list[QARecord] = []
    seen: set[str] = set()
    for line_no, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except ValueError as exc:
            raise ValueError(f"{path}:{line_no}: malformed JSON: {exc}") from exc
        expected = data.get("expected_states")
        record = QARecord(
            id=str(data["id"]), question=data["question"],
            reference_answer=data["reference_answer"],
            expected_states=tuple(expected) if expected is not None else None)
        if record.id in seen:
            raise ValueError(f"{path}:{line_no}: duplicate record id {record.id}")
        seen.add(record.id)
        records.append(record)
    return records


def _mean_scores(values: list[MetricScores]) -> MetricScores:
    if not values:
        return MetricScores(0.0, 0.0, 0.0)
    n = len(values)
    return MetricScores(
        precision=sum(v.precision for v in values) / n,
        recall=sum(v.recall for v in values) / n,
        f1=sum(v.f1 for v in values) / n)


def config_fingerprint(engine: QueryEngine) -> str:
    gen = engine.generator
    return (f"{engine.embedder.spec.fingerprint}|{gen.kind.value}:{gen.model_name}"
            f"|k={engine.k}|threshold={engine.threshold}")


def run_eval(dataset: list[QARecord], engine: QueryEngine,
             external_scores: dict[str, dict] | None = None) -> EvalReport:
    """Answer every record and score the answers against the references.

    A record whose query raises is kept in the report with its error and
    left out of the means, so one bad record cannot sink a whole run.
    """
    if not dataset:
        raise ValueError("dataset must be non-empty")
    results: list[RecordResult] = []
    rouge_means: list[MetricScores] = []
    embed_means: list[MetricScores] = []
    excluded: list[str] = []
    for record in dataset:
        try:
            answer = engine.answer_query(record.question)
        except Exception as exc:
            log.warning("record %s failed: %s", record.id, exc)
            results.append(RecordResult(id=record.id, error=str(exc)))
            excluded.append(record.id)
            continue
        rouge = rouge_l(answer.text, record.reference_answer)
        embedded = greedy_embed_score(answer.text, record.reference_answer,
                                      engine.embedder)
        routing_correct = None
        if record.expected_states is not None:
            routing_correct = (list(answer.strategy.state_labels)
                               == list(record.expected_states))
        results.append(RecordResult(
            id=record.id, strategy=answer.strategy.strategy.value,
            latency_ms=answer.timings.total_ms,
            rouge_l=rouge, embed_score=embedded,
            routing_correct=routing_correct,
            external=(external_scores or {}).get(record.id)))
        rouge_means.append(rouge)
        embed_means.append(embedded)
    return EvalReport(
        per_record=tuple(results),
        means={"rouge_l": _mean_scores(rouge_means),
               "embed_score": _mean_scores(embed_means)},
        config_fingerprint=config_fingerprint(engine),
        excluded=tuple(excluded))


def load_external_scores(path: str | Path) -> dict[str, dict]:
    """Sidecar produced by an external scoring tool: record id -> scores."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError("external scores file must hold a JSON object")
    return data


@dataclass(frozen=True)
class BenchRow:
    query: str
    strategy: str
    latency_ms: float | None
    partitions_scanned: int | None
    states_identified: tuple[str, ...]
    note: str = ""

    def csv_cells(self) -> list[str]:
        latency = repr(self.latency_ms) if self.latency_ms is not None else self.note
        partitions = "" if self.partitions_scanned is None else str(self.partitions_scanned)
        return [self.query, self.strategy, latency, partitions,
                ";".join(self.states_identified)]


def bench_strategies(queries: list[str], engine: QueryEngine,
                     strategies: tuple[str, ...] = ("wdi", "swi"),
                     k: int | None = None) -> list[BenchRow]:
    """Run every query under each forced strategy and time it.

    Queries that name no state cannot run state-wise; their SWI row is
    kept with a marker so the comparison table stays rectangular.
    """
    rows: list[BenchRow] = []
    for query in queries:
        if "wdi" in strategies:
            wdi = engine.answer_query(query, strategy="wdi", k=k)
            rows.append(BenchRow(
                query=query, strategy="wdi", latency_ms=wdi.timings.total_ms,
                partitions_scanned=wdi.partitions_scanned, states_identified=()))
        if "swi" not in strategies:
            continue
        try:
            swi = engine.answer_query(query, strategy="swi", k=k)
        except RoutingError:
            rows.append(BenchRow(query=query, strategy="swi", latency_ms=None,
                                 partitions_scanned=None, states_identified=(),
                                 note=BENCH_UNROUTABLE))
            continue
        rows.append(BenchRow(
            query=query, strategy="swi", latency_ms=swi.timings.total_ms,
            partitions_scanned=swi.partitions_scanned,
            states_identified=swi.strategy.state_labels))
    return rows


def write_bench_csv(rows: list[BenchRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(BENCH_CSV_HEADER)
        for row in rows:
            writer.writerow(row.csv_cells())
