"""Matplotlib rendering of report figures next to the delimited outputs.

All figures render through the Agg backend with pinned metadata so that
repeated runs produce byte-identical files.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_SAVE_OPTS = {"dpi": 110, "metadata": {"Software": "centering-kit"}}


def save_transition_figure(counts: Mapping[str, int], path: str) -> None:
    """Bar chart of transition label totals across a corpus."""
    labels = list(counts)
    values = [counts[k] for k in labels]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(range(len(labels)), values, color="#4878a8")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel("transitions")
    ax.set_title("Transition distribution")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def save_coherence_figure(mean_ch: Mapping[str, float], path: str) -> None:
    """Mean permutation score per metric, with the 50-point chance line."""
    labels = list(mean_ch)
    values = [mean_ch[k] for k in labels]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(range(len(labels)), values, color="#6a9a58")
    ax.axhline(50.0, color="#888888", linestyle="--", linewidth=1)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels)
    ax.set_ylim(0, 100)
    ax.set_ylabel("mean ch")
    ax.set_title("Permutation coherence by metric")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def save_correlation_figure(
    xs: Sequence[float], ys: Sequence[float], caption: str, path: str
) -> None:
    """Scatter of centering score against coreference F1 with a fitted line."""
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.scatter(xs, ys, s=22, color="#4878a8")
    if len(xs) >= 2 and max(xs) > min(xs):
        # least-squares line, drawn across the data range
        n = len(xs)
        mx = sum(xs) / n
        my = sum(ys) / n
        sxx = sum((x - mx) ** 2 for x in xs)
        sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
        slope = sxy / sxx
        x0, x1 = min(xs), max(xs)
        ax.plot(
            [x0, x1],
            [my + slope * (x0 - mx), my + slope * (x1 - mx)],
            color="#a85448",
            linewidth=1.2,
        )
    ax.set_xlabel("centering score")
    ax.set_ylabel("coreference F1")
    ax.set_title(caption)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def save_fit_figure(
    points: Sequence[tuple[str, float | None]], path: str
) -> None:
    """Correlation achieved at each forget-function grid point."""
    labels = [label for label, _ in points]
    values = [r if r is not None else float("nan") for _, r in points]
    fig, ax = plt.subplots(figsize=(6.5, 3.5))
    ax.plot(range(len(labels)), values, marker="o", color="#4878a8")
    step = max(1, len(labels) // 12)
    ax.set_xticks(range(0, len(labels), step))
    ax.set_xticklabels(labels[::step], rotation=45, ha="right", fontsize=7)
    ax.set_ylabel("pearson r")
    ax.set_title("Forget-function grid search")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)
