"""Chart rendering for evaluation reports and benchmark tables.

Figures are written straight to image files with the Agg backend so the
report path works on headless machines.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .evalsuite import BenchRow, EvalReport  # noqa: E402


def render_eval_figure(report: EvalReport, path: str | Path) -> Path:
    """Grouped bar chart of mean precision/recall/F1 per metric."""
    path = Path(path)
    names = sorted(report.means)
    parts = ["precision", "recall", "f1"]
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.8 / len(parts)
    for i, part in enumerate(parts):
        xs = [j + i * width for j in range(len(names))]
        ys = [getattr(report.means[name], part) for name in names]
        ax.bar(xs, ys, width=width, label=part)
    ax.set_xticks([j + width for j in range(len(names))])
    ax.set_xticklabels(names)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("score")
    ax.set_title(f"Evaluation means over {len(report.per_record)} records")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_bench_figure(rows: list[BenchRow], path: str | Path) -> Path:
    """Latency comparison per query; rows without a latency are skipped."""
    path = Path(path)
    by_query: dict[str, dict[str, float]] = {}
    for row in rows:
        if row.latency_ms is not None:
            by_query.setdefault(row.query, {})[row.strategy] = row.latency_ms
    queries = list(by_query)
    fig, ax = plt.subplots(figsize=(max(7, 1.2 * len(queries)), 4.5))
    width = 0.38
    for i, strategy in enumerate(("wdi", "swi")):
        xs = [j + i * width for j in range(len(queries))]
        ys = [by_query[q].get(strategy, 0.0) for q in queries]
        ax.bar(xs, ys, width=width, label=strategy.upper())
    ax.set_xticks([j + width / 2 for j in range(len(queries))])
    ax.set_xticklabels([_shorten(q) for q in queries], rotation=20, ha="right")
    ax.set_ylabel("latency (ms)")
    ax.set_title("Query latency by retrieval strategy")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _shorten(text: str, limit: int = 32) -> str:
    return text if len(text) <= limit else text[:limit - 3] + "..."
