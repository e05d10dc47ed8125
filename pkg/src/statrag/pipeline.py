"""End-to-end query execution: retrieve, assemble a prompt, generate.

Two retrieval shapes exist. The whole-index path searches every
partition at once and makes a single generation call. The state-wise
path runs one retrieval and one generation per routed jurisdiction and
stitches the sections together under a header naming the states, so a
reader can see which law each piece of the answer came from.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from enum import Enum

import requests

from .corpus import Jurisdiction
from .embed import EmbedderSpec, build_embedder
from .index import ScoredChunk, VectorIndex
from .router import RoutingDecision, Strategy, route

SENTINEL = ("I am sorry, I could not find any information to answer the "
            "question you asked.")

NOT_FOUND_MARKER = "could not find any information"

DEFAULT_TEMPLATE = """You are a legal research assistant. Answer the question using only the numbered context passages below, citing passage numbers where relevant. If the passages do not contain the information needed, reply exactly: "I am sorry, I could not find any information to answer the question you asked."

Question: {{QUESTION}}

Context passages:
{{CONTEXTS}}
"""

_SYSTEM_MESSAGE = ("You are a legal research assistant answering questions "
                   "about statutes from retrieved context.")

DEFAULT_K = 5
DEFAULT_THRESHOLD = 0.25


class GenerationError(Exception):
    """Remote generator transport or protocol failure; never silently degraded."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class RoutingError(Exception):
    """State-wise execution was forced but the query names no jurisdiction."""


class GeneratorKind(str, Enum):
    EXTRACTIVE_STUB = "extractive_stub"
    REMOTE_CHAT = "remote_chat"


@dataclass(frozen=True)
class GeneratorSpec:
    kind: GeneratorKind = GeneratorKind.EXTRACTIVE_STUB
    endpoint_url: str = ""
    model_name: str = ""
    auth_env_var: str = ""
    temperature: float = 0.0

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.kind is GeneratorKind.REMOTE_CHAT and not self.endpoint_url:
            raise ValueError("remote chat generator requires an endpoint_url")

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "endpoint_url": self.endpoint_url,
                "model_name": self.model_name, "auth_env_var": self.auth_env_var,
                "temperature": self.temperature}

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorSpec":
        return cls(kind=GeneratorKind(data.get("kind", "extractive_stub")),
                   endpoint_url=data.get("endpoint_url", ""),
                   model_name=data.get("model_name", ""),
                   auth_env_var=data.get("auth_env_var", ""),
                   temperature=float(data.get("temperature", 0.0)))


@dataclass(frozen=True)
class SourceRef:
    chunk_id: str
    doc_id: str
    citation: str
    score: float

    def to_dict(self) -> dict:
        return {"chunk_id": self.chunk_id, "doc_id": self.doc_id,
                "citation": self.citation, "score": self.score}


@dataclass(frozen=True)
class Section:
    jurisdiction: Jurisdiction
    text: str
    not_found: bool

    def to_dict(self) -> dict:
        return {"state": self.jurisdiction.label, "text": self.text}


@dataclass(frozen=True)
class Timings:
    route_ms: float = 0.0
    retrieve_ms: float = 0.0
    generate_ms: float = 0.0
    total_ms: float = 0.0

    def to_dict(self) -> dict:
        return {"route_ms": self.route_ms, "retrieve_ms": self.retrieve_ms,
                "generate_ms": self.generate_ms, "total_ms": self.total_ms}


@dataclass(frozen=True)
class Answer:
    text: str
    sections: tuple[Section, ...]
    sources: tuple[SourceRef, ...]
    strategy: RoutingDecision
    not_found: bool
    timings: Timings
    partitions_scanned: int

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "sections": [s.to_dict() for s in self.sections],
            "sources": [s.to_dict() for s in self.sources],
            "strategy": self.strategy.to_dict(),
            "not_found": self.not_found,
            "timings": self.timings.to_dict(),
            "partitions_scanned": self.partitions_scanned,
        }


def assemble_prompt(question: str, contexts: list[ScoredChunk], template: str,
                    citations: dict[str, str] | None = None) -> str:
    """Substitute the question and numbered context blocks into the template."""
    blocks = []
    for i, hit in enumerate(contexts, start=1):
        citation = (citations or {}).get(hit.chunk.doc_id, hit.chunk.doc_id)
        blocks.append(f"[{i}] ({citation}) {hit.chunk.text}")
    rendered = "\n\n".join(blocks)
    return template.replace("{{QUESTION}}", question).replace("{{CONTEXTS}}", rendered)


def validate_template(template: str) -> str:
    for placeholder in ("{{QUESTION}}", "{{CONTEXTS}}"):
        if placeholder not in template:
            raise ValueError(f"prompt template is missing the {placeholder} placeholder")
    return template


def generate(spec: GeneratorSpec, prompt: str, contexts: list[ScoredChunk],
             threshold: float, citations: dict[str, str] | None = None,
             session: requests.Session | None = None,
             timeout: float = 60.0) -> tuple[str, bool]:
    """Produce (text, not_found) for an assembled prompt.

    The extractive stub quotes the best chunk when it clears the score
    threshold and otherwise returns the exact not-found sentinel; it
    exists so the full pipeline runs deterministically with no model.
    """
    if spec.kind is GeneratorKind.EXTRACTIVE_STUB:
        if not contexts or contexts[0].score < threshold:
            return SENTINEL, True
        top = contexts[0]
        citation = (citations or {}).get(top.chunk.doc_id, top.chunk.doc_id)
        return f"According to {citation}: {top.chunk.text}", False
    return _generate_remote(spec, prompt, session, timeout)


def _generate_remote(spec: GeneratorSpec, prompt: str,
                     session: requests.Session | None,
                     timeout: float) -> tuple[str, bool]:
    headers = {"Content-Type": "application/json"}
    if spec.auth_env_var:
        token = os.environ.get(spec.auth_env_var)
        if not token:
            raise GenerationError(
                f"auth env var {spec.auth_env_var} is not set")
        headers["Authorization"] = f"Bearer {token}"
    body = {
        "model": spec.model_name,
        "temperature": spec.temperature,
        "messages": [
            {"role": "system", "content": _SYSTEM_MESSAGE},
            {"role": "user", "content": prompt},
        ],
    }
    post = session.post if session is not None else requests.post
    try:
        response = post(spec.endpoint_url, json=body, headers=headers,
                        timeout=timeout)
    except requests.RequestException as exc:
        raise GenerationError(f"chat request failed: {exc}") from exc
    if response.status_code != 200:
        raise GenerationError(
            f"chat endpoint returned HTTP {response.status_code}",
            status=response.status_code)
    try:
        text = response.json()["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise GenerationError(f"malformed chat response: {exc}") from exc
    if not isinstance(text, str):
        raise GenerationError("chat response content is not a string")
    return text, NOT_FOUND_MARKER in text


def swi_header(states: tuple[Jurisdiction, ...]) -> str:
    return "Looking into the following state(s): " + ", ".join(
        j.label for j in states)


class QueryEngine:
    """Holds the index plus every knob needed to answer a query.

    The clock is injectable so tests can pin timings; everything else
    that influences output text is part of the constructor arguments,
    which is what makes stub-generator runs reproducible byte for byte.
    """

    def __init__(self, index: VectorIndex, embedder, generator: GeneratorSpec,
                 citations: dict[str, str] | None = None,
                 template: str = DEFAULT_TEMPLATE,
                 k: int = DEFAULT_K, threshold: float = DEFAULT_THRESHOLD,
                 swi_enabled: bool = True, include_federal: bool = False,
                 aliases: dict[str, str] | None = None,
                 adjacency: dict[str, list[str]] | None = None,
                 clock=time.perf_counter, on_prompt=None):
        if isinstance(embedder, EmbedderSpec):
            embedder = build_embedder(embedder)
        self.index = index
        self.embedder = embedder
        self.generator = generator
        self.citations = dict(citations or {})
        self.template = validate_template(template)
        self.k = k
        self.threshold = threshold
        self.swi_enabled = swi_enabled
        self.include_federal = include_federal
        self.aliases = aliases
        self.adjacency = adjacency
        self._clock = clock
        self._on_prompt = on_prompt
        self._session = requests.Session() \
            if generator.kind is GeneratorKind.REMOTE_CHAT else None

    # -- pieces -----------------------------------------------------------

    def route(self, question: str) -> RoutingDecision:
        return route(question, swi_enabled=self.swi_enabled,
                     aliases=self.aliases, adjacency=self.adjacency)

    def _retrieve(self, question: str,
                  restrict: set[Jurisdiction] | None, k: int) -> list[ScoredChunk]:
        vector = self.embedder.embed_text(question)
        return self.index.search(vector, k, restrict)

    def _generate(self, question: str, contexts: list[ScoredChunk]) -> tuple[str, bool]:
        prompt = assemble_prompt(question, contexts, self.template, self.citations)
        if self._on_prompt is not None:
            self._on_prompt(prompt)
        return generate(self.generator, prompt, contexts, self.threshold,
                        self.citations, session=self._session)

    def _sources(self, hits: list[ScoredChunk]) -> tuple[SourceRef, ...]:
        best: dict[str, SourceRef] = {}
        for hit in hits:
            chunk = hit.chunk
            ref = SourceRef(chunk_id=chunk.chunk_id, doc_id=chunk.doc_id,
                            citation=self.citations.get(chunk.doc_id, chunk.doc_id),
                            score=hit.score)
            kept = best.get(chunk.chunk_id)
            if kept is None or ref.score > kept.score:
                best[chunk.chunk_id] = ref
        return tuple(sorted(best.values(), key=lambda r: (-r.score, r.chunk_id)))

    # -- strategies -------------------------------------------------------

    def run_wdi(self, question: str, k: int | None = None,
                route_ms: float = 0.0, started: float | None = None) -> Answer:
        started = self._clock() if started is None else started
        k = self.k if k is None else k
        decision = RoutingDecision(strategy=Strategy.WDI)

        t0 = self._clock()
        hits = self._retrieve(question, None, k)
        t1 = self._clock()
        text, not_found = self._generate(question, hits)
        t2 = self._clock()

        return Answer(
            text=text, sections=(), sources=self._sources(hits),
            strategy=decision, not_found=not_found,
            timings=Timings(route_ms=route_ms,
                            retrieve_ms=(t1 - t0) * 1000.0,
                            generate_ms=(t2 - t1) * 1000.0,
                            total_ms=(self._clock() - started) * 1000.0),
            partitions_scanned=self.index.partition_count)

    def run_swi(self, question: str, states, k: int | None = None,
                route_ms: float = 0.0, started: float | None = None,
                decision: RoutingDecision | None = None) -> Answer:
        started = self._clock() if started is None else started
        k = self.k if k is None else k
        states = tuple(_as_jurisdiction(s) for s in states)
        if not states:
            raise RoutingError("state-wise retrieval requires at least one state")
        if decision is None:
            decision = RoutingDecision(strategy=Strategy.SWI, states=states)

        retrieve_ms = 0.0
        generate_ms = 0.0
        sections: list[Section] = []
        all_hits: list[ScoredChunk] = []
        for jurisdiction in states:
            restrict = {jurisdiction}
            if self.include_federal and jurisdiction.name is not None:
                restrict.add(Jurisdiction.federal())
            t0 = self._clock()
            hits = self._retrieve(question, restrict, k)
            t1 = self._clock()
            text, not_found = self._generate(question, hits)
            t2 = self._clock()
            retrieve_ms += (t1 - t0) * 1000.0
            generate_ms += (t2 - t1) * 1000.0
            sections.append(Section(jurisdiction=jurisdiction, text=text,
                                    not_found=not_found))
            all_hits.extend(hits)

        body = "\n".join(f"{s.jurisdiction.label}: {s.text}" for s in sections)
        text = swi_header(states) + "\n" + body
        return Answer(
            text=text, sections=tuple(sections), sources=self._sources(all_hits),
            strategy=decision, not_found=all(s.not_found for s in sections),
            timings=Timings(route_ms=route_ms, retrieve_ms=retrieve_ms,
                            generate_ms=generate_ms,
                            total_ms=(self._clock() - started) * 1000.0),
            partitions_scanned=len(states))

    def answer_query(self, question: str, strategy: str | Strategy = "auto",
                     k: int | None = None) -> Answer:
        """Route the question, then run the chosen strategy end to end.

        ``strategy`` may force "wdi" or "swi"; "auto" follows the router.
        Forcing "swi" on a query that names no jurisdiction is an error
        rather than a silent fallback.
        """
        started = self._clock()
        t0 = self._clock()
        decision = self.route(question)
        route_ms = (self._clock() - t0) * 1000.0

        mode = strategy.value if isinstance(strategy, Strategy) else str(strategy).lower()
        if mode == "auto":
            mode = decision.strategy.value
        if mode == Strategy.WDI.value:
            return self.run_wdi(question, k, route_ms=route_ms, started=started)
        if mode == Strategy.SWI.value:
            if not decision.states:
                # Re-route ignoring the swi_enabled gate: forcing SWI
                # overrides configuration, not the absence of states.
                decision = route(question, swi_enabled=True, aliases=self.aliases,
                                 adjacency=self.adjacency)
            if not decision.states:
                raise RoutingError("no states named in query")
            swi_decision = RoutingDecision(
                strategy=Strategy.SWI, states=decision.states,
                expanded_from_neighbors=decision.expanded_from_neighbors)
            return self.run_swi(question, decision.states, k, route_ms=route_ms,
                                started=started, decision=swi_decision)
        raise ValueError(f"unknown strategy: {strategy!r}")


def _as_jurisdiction(value) -> Jurisdiction:
    if isinstance(value, Jurisdiction):
        return value
    return Jurisdiction.parse(str(value))


def build_citation_catalog(documents) -> dict[str, str]:
    """Map doc_id to citation for prompt headers and source rows."""
    return {doc.doc_id: doc.citation for doc in documents}
