"""Query routing: decide between whole-index and state-wise retrieval.

Jurisdiction mentions are found with a compiled gazetteer rather than a
model. The alternation is sorted longest-first so "West Virginia" can
never be eaten by a bare "Virginia" match, and every surface form is
wrapped in word boundaries so "Kansas" does not fire inside "Arkansas".
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .corpus import US_STATES, Jurisdiction

NEIGHBOR_PHRASE = "neighboring states"

_FEDERAL_FORM = "federal"


class Strategy(str, Enum):
    WDI = "wdi"
    SWI = "swi"


@dataclass(frozen=True)
class RoutingDecision:
    strategy: Strategy
    states: tuple[Jurisdiction, ...] = ()
    expanded_from_neighbors: bool = False

    def __post_init__(self):
        if self.strategy is Strategy.SWI and not self.states:
            raise ValueError("state-wise routing requires at least one jurisdiction")
        if self.strategy is Strategy.WDI and self.states:
            raise ValueError("whole-index routing carries no jurisdiction list")

    @property
    def state_labels(self) -> tuple[str, ...]:
        return tuple(j.label for j in self.states)

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy.value,
            "states": list(self.state_labels),
            "expanded_from_neighbors": self.expanded_from_neighbors,
        }


def _parse_target(name: str) -> Jurisdiction:
    if name.strip().lower() == _FEDERAL_FORM:
        return Jurisdiction.federal()
    return Jurisdiction.state(name)


_plain_gazetteer: list[tuple[re.Pattern, Jurisdiction]] | None = None


def _compile_gazetteer(aliases: dict[str, str] | None) -> list[tuple[re.Pattern, Jurisdiction]]:
    global _plain_gazetteer
    if not aliases and _plain_gazetteer is not None:
        return _plain_gazetteer
    surface_forms: dict[str, Jurisdiction] = {
        name.lower(): Jurisdiction.state(name) for name in US_STATES}
    surface_forms[_FEDERAL_FORM] = Jurisdiction.federal()
    for alias, canonical in (aliases or {}).items():
        surface_forms[alias.lower()] = _parse_target(canonical)
    # Longest surface form first; internal spaces tolerate any whitespace run.
    ordered = sorted(surface_forms, key=lambda s: (-len(s), s))
    compiled = []
    for form in ordered:
        pattern = re.escape(form).replace(r"\ ", r"\s+")
        # \b only works against word characters; "Fla." ends with one that
        # is not, and there the literal punctuation is the boundary itself.
        if form[0].isalnum():
            pattern = r"\b" + pattern
        if form[-1].isalnum():
            pattern = pattern + r"\b"
        compiled.append((re.compile(pattern, re.IGNORECASE), surface_forms[form]))
    if not aliases:
        _plain_gazetteer = compiled
    return compiled


def extract_states(query: str, aliases: dict[str, str] | None = None) -> list[Jurisdiction]:
    """Jurisdictions named in the query, in order of first mention.

    Canonical state names always match; the bare word "federal" maps to
    the Federal jurisdiction. Abbreviations only match when supplied
    through the alias table.
    """
    matches: list[tuple[int, Jurisdiction]] = []
    claimed: list[tuple[int, int]] = []
    for pattern, jurisdiction in _compile_gazetteer(aliases):
        for m in pattern.finditer(query):
            span = (m.start(), m.end())
            if any(s < span[1] and span[0] < e for s, e in claimed):
                continue  # inside a longer name already matched
            claimed.append(span)
            matches.append((span[0], jurisdiction))
    matches.sort(key=lambda t: t[0])
    seen: set[Jurisdiction] = set()
    ordered = []
    for _, jurisdiction in matches:
        if jurisdiction not in seen:
            seen.add(jurisdiction)
            ordered.append(jurisdiction)
    return ordered


def expand_neighbors(states: list[Jurisdiction], query: str,
                     adjacency: dict[str, list[str]] | None) -> tuple[list[Jurisdiction], bool]:
    """Append each named state's neighbors when the query asks for them.

    Expansion happens only when the trigger phrase occurs, an adjacency
    table is configured, and at least one state was named; otherwise the
    input comes back unchanged. Added neighbors are deduplicated, sorted
    alphabetically, and kept after the explicitly named jurisdictions.
    """
    named_states = [j for j in states if j.name is not None]
    if NEIGHBOR_PHRASE not in query.lower() or not adjacency or not named_states:
        return list(states), False
    present = set(states)
    added: set[str] = set()
    for jurisdiction in named_states:
        for neighbor in adjacency.get(jurisdiction.name, []):
            candidate = Jurisdiction.state(neighbor)
            if candidate not in present:
                added.add(candidate.name)
    tail = [Jurisdiction.state(name) for name in sorted(added)]
    return list(states) + tail, True


def route(query: str, swi_enabled: bool = True,
          aliases: dict[str, str] | None = None,
          adjacency: dict[str, list[str]] | None = None) -> RoutingDecision:
    """Pick the retrieval strategy for a query.

    Named jurisdictions switch the engine to state-wise retrieval when
    that mode is enabled; anything else searches the whole index.
    """
    states = extract_states(query, aliases)
    expanded = False
    if states:
        states, expanded = expand_neighbors(states, query, adjacency)
    if swi_enabled and states:
        return RoutingDecision(strategy=Strategy.SWI, states=tuple(states),
                               expanded_from_neighbors=expanded)
    return RoutingDecision(strategy=Strategy.WDI)


def load_aliases(path: str | Path) -> dict[str, str]:
    """Alias table: surface form -> canonical jurisdiction name."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError("alias file must hold a JSON object")
    return {str(k): _parse_target(str(v)).label for k, v in data.items()}


def load_adjacency(path: str | Path) -> dict[str, list[str]]:
    """Adjacency table: state -> list of bordering states."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError("adjacency file must hold a JSON object")
    table: dict[str, list[str]] = {}
    for state, neighbors in data.items():
        table[Jurisdiction.state(state).name] = [
            Jurisdiction.state(n).name for n in neighbors]
    return table
