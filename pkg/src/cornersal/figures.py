"""Figure rendering for evaluation reports (headless-safe)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluate import EvalReport


def plot_pr_curves(reports: dict[str, EvalReport], path) -> None:
    """One precision-recall line per labeled report."""
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    for label, report in reports.items():
        ax.plot(report.recall, report.precision, lw=1.8, label=label)
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.0, 1.05)
    ax.grid(alpha=0.3)
    ax.legend(loc="lower left")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_f_bars(reports: dict[str, EvalReport], path) -> None:
    """Adaptive F-measure per labeled report as a bar chart."""
    labels = list(reports)
    values = [reports[label].adaptive_f for label in labels]
    fig, ax = plt.subplots(figsize=(4.0, 4.0))
    bars = ax.bar(labels, values, width=0.6, color=["#3b6fb6", "#b66a3b"][: len(labels)])
    ax.bar_label(bars, fmt="%.3f")
    ax.set_ylabel("adaptive F-measure")
    ax.set_ylim(0.0, 1.05)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
