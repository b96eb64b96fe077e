"""Report figures rendered to files.

Uses the Agg backend so rendering works headless; callers get back the
paths that were written.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .scoring import DomainRow, PortfolioSummary

_LEVEL_COLORS = ("#2a9d8f", "#e9c46a", "#f4a261", "#e76f51")
_LEVEL_NAMES = ("L1", "L2", "L3", "L4")


def _level_counts(row: DomainRow) -> tuple[int, int, int, int]:
    return (row.l1, row.l2, row.l3, row.l4)


def save_level_distribution(summary: PortfolioSummary, path: str | Path) -> Path:
    """Bar chart of task counts per autonomy level across the portfolio."""
    counts = _level_counts(summary.total)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.bar(_LEVEL_NAMES, counts, color=_LEVEL_COLORS)
    for x, count in enumerate(counts):
        ax.text(x, count, str(count), ha="center", va="bottom")
    ax.set_xlabel("autonomy level")
    ax.set_ylabel("tasks")
    ax.set_title(f"Autonomy levels across {summary.total.tasks} tasks")
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def save_domain_level_chart(summary: PortfolioSummary, path: str | Path) -> Path:
    """Stacked horizontal bars: level mix per domain."""
    rows = summary.rows
    fig, ax = plt.subplots(figsize=(7.0, 1.0 + 0.6 * max(len(rows), 1)))
    names = [row.domain for row in rows]
    base = [0] * len(rows)
    for idx, name in enumerate(_LEVEL_NAMES):
        widths = [_level_counts(row)[idx] for row in rows]
        ax.barh(names, widths, left=base, label=name, color=_LEVEL_COLORS[idx])
        base = [b + w for b, w in zip(base, widths)]
    ax.invert_yaxis()
    ax.set_xlabel("tasks")
    ax.set_title("Level mix by domain")
    ax.legend(loc="lower right", ncol=4, fontsize="small")
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
