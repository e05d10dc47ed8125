/** HTML builders for answers, sources, and history.
 *
 * Pure string -> string functions so they test without a browser; the
 * entry point assigns the output to innerHTML.
 */

import type { Answer, SourceRef } from "./api.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function panel(heading: string, body: string, warning: boolean): string {
  const cls = warning ? "panel warning" : "panel";
  return `<section class="${cls}">`
    + `<h3>${escapeHtml(heading)}</h3>`
    + `<p class="answer-text">${escapeHtml(body)}</p>`
    + `</section>`;
}

/** One labeled panel per state under SWI; a single unlabeled panel under
 * WDI. not_found drives the warning styling, never text matching. */
export function renderAnswer(answer: Answer): string {
  const parts: string[] = [];
  const strategy = answer.strategy;
  const states = strategy.states.join(", ");
  const summary = strategy.strategy === "swi"
    ? `state-wise over ${states}`
    : "whole index";
  const expanded = strategy.expanded_from_neighbors
    ? " (expanded to neighboring states)" : "";
  parts.push(`<p class="meta">Searched ${escapeHtml(summary)}${expanded};`
    + ` ${answer.partitions_scanned} partition(s),`
    + ` ${answer.timings.total_ms.toFixed(1)} ms</p>`);

  if (answer.sections.length === 0) {
    parts.push(panel("Answer", answer.text, answer.not_found));
  } else {
    for (const section of answer.sections) {
      parts.push(panel(section.state, section.text, answer.not_found));
    }
  }
  parts.push(renderSources(answer.sources));
  return parts.join("");
}

/** Expandable source rows in the order the server sent them (descending
 * score). The server guarantees unique chunk_ids; we refuse to render a
 * payload that breaks that. */
export function renderSources(sources: SourceRef[]): string {
  const seen = new Set<string>();
  for (const source of sources) {
    if (seen.has(source.chunk_id)) {
      throw new Error(`duplicate source chunk_id: ${source.chunk_id}`);
    }
    seen.add(source.chunk_id);
  }
  if (sources.length === 0) {
    return `<p class="no-sources">No sources</p>`;
  }
  const rows = sources.map((source) =>
    `<details class="source">`
    + `<summary>${escapeHtml(source.citation)}</summary>`
    + `<dl>`
    + `<dt>document</dt><dd>${escapeHtml(source.doc_id)}</dd>`
    + `<dt>chunk</dt><dd>${escapeHtml(source.chunk_id)}</dd>`
    + `<dt>score</dt><dd>${source.score.toFixed(3)}</dd>`
    + `</dl>`
    + `</details>`);
  return `<div class="sources"><h4>Sources</h4>${rows.join("")}</div>`;
}

export function renderErrorBanner(message: string): string {
  return `<div class="error-banner" role="alert">`
    + `${escapeHtml(message)} <button type="button" data-retry>Retry</button>`
    + `</div>`;
}
