/** Console wiring: form handling, pending state, history list. */

import { buildQueryRequest, describeFailure, fetchHealth, postQuery } from "./api.js";
import type { StrategyChoice } from "./api.js";
import { QueryHistory } from "./history.js";
import { escapeHtml, renderAnswer, renderErrorBanner } from "./render.js";

function element<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) {
    throw new Error(`missing element #${id}`);
  }
  return found as T;
}

const form = element<HTMLFormElement>("ask-form");
const questionInput = element<HTMLTextAreaElement>("question");
const strategySelect = element<HTMLSelectElement>("strategy");
const kInput = element<HTMLInputElement>("k");
const baseInput = element<HTMLInputElement>("api-base");
const submitButton = element<HTMLButtonElement>("ask");
const answerView = element<HTMLDivElement>("answer");
const historyView = element<HTMLUListElement>("history");
const statusView = element<HTMLSpanElement>("service-status");

const history = new QueryHistory();
let pending = false;

function apiBase(): string {
  return baseInput.value.trim().replace(/\/+$/, "");
}

function renderHistoryList(): void {
  historyView.innerHTML = history.list().map((entry, index) =>
    `<li><button type="button" data-history="${index}">`
    + `<span class="h-strategy">${escapeHtml(entry.strategy_used)}</span> `
    + `${escapeHtml(entry.question)}`
    + `</button></li>`).join("");
}

function setPending(value: boolean): void {
  pending = value;
  submitButton.disabled = value;
  submitButton.textContent = value ? "Asking..." : "Ask";
}

async function submit(): Promise<void> {
  if (pending) {
    return;
  }
  const question = questionInput.value.trim();
  if (!question) {
    questionInput.focus();
    return;
  }
  const strategy = strategySelect.value as StrategyChoice;
  const k = kInput.value ? Number(kInput.value) : null;

  setPending(true);
  try {
    const answer = await postQuery(apiBase(), buildQueryRequest(question, strategy, k));
    history.add(question, answer);
    answerView.innerHTML = renderAnswer(answer);
    renderHistoryList();
  } catch (err) {
    answerView.innerHTML = renderErrorBanner(describeFailure(err));
    const retry = answerView.querySelector<HTMLButtonElement>("[data-retry]");
    retry?.addEventListener("click", () => void submit());
  } finally {
    setPending(false);
  }
}

form.addEventListener("submit", (event) => {
  event.preventDefault();
  void submit();
});

historyView.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest<HTMLButtonElement>("[data-history]");
  if (!target) {
    return;
  }
  const entry = history.get(Number(target.dataset.history));
  if (entry) {
    questionInput.value = entry.question;
    answerView.innerHTML = renderAnswer(entry.answer);
  }
});

async function probeService(): Promise<void> {
  try {
    const health = await fetchHealth(apiBase());
    statusView.textContent =
      `${health.status}: ${health.chunks} chunks in ${health.partitions} partitions`;
    statusView.className = "status-ok";
  } catch {
    statusView.textContent = "service unreachable";
    statusView.className = "status-down";
  }
}

baseInput.addEventListener("change", () => void probeService());
void probeService();
