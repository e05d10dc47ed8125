/** Session-local query history: append-only, newest first. */

import type { Answer } from "./api.js";

export const SUMMARY_LENGTH = 200;

export interface HistoryEntry {
  question: string;
  strategy_used: string;
  timestamp: string;
  answer_summary: string;
  answer: Answer;
}

export class QueryHistory {
  private entries: HistoryEntry[] = [];

  add(question: string, answer: Answer, now: Date = new Date()): HistoryEntry {
    const entry: HistoryEntry = {
      question,
      strategy_used: answer.strategy.strategy,
      timestamp: now.toISOString(),
      answer_summary: answer.text.slice(0, SUMMARY_LENGTH),
      answer,
    };
    this.entries.unshift(entry);
    return entry;
  }

  /** Newest first; the array is a copy so callers cannot reorder or
   * delete past entries. */
  list(): HistoryEntry[] {
    return [...this.entries];
  }

  get(index: number): HistoryEntry | undefined {
    return this.entries[index];
  }

  get length(): number {
    return this.entries.length;
  }
}
