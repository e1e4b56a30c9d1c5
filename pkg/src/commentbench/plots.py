"""Standalone SVG renderings of the analysis outputs (matplotlib, Agg)."""

from __future__ import annotations

from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .analysis import AblationCurve, BivariateSample, ZipfTable  # noqa: E402


def save_zipf_svg(tables: Mapping[str, ZipfTable], path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, table in tables.items():
        ranks = range(1, len(table.rows) + 1)
        freqs = [row[2] for row in table.rows]
        ax.plot(ranks, freqs, label=label, linewidth=1.2)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("rank")
    ax.set_ylabel("relative frequency")
    ax.set_title("n-gram rank/frequency")
    if tables:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def save_ablation_svg(curves: Mapping[str, AblationCurve], path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, curve in curves.items():
        ks = [k for k, _ in curve.points]
        scores = [s for _, s in curve.points]
        ax.plot(ks, scores, label=label, linewidth=1.2)
    ax.set_xlabel("most frequent n-grams replaced")
    ax.set_ylabel("mean sentence M2 score")
    ax.set_title("frequent n-gram ablation")
    if curves:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def save_hexbin_svg(sample: BivariateSample, bins: int, path, label: str = "") -> None:
    surviving = sample.surviving()
    fig, ax = plt.subplots(figsize=(5, 4.5))
    if surviving:
        xs = [p[0] for p in surviving]
        ys = [p[1] for p in surviving]
        hb = ax.hexbin(xs, ys, gridsize=bins, extent=(0, 100, 0, 100), mincnt=1)
        fig.colorbar(hb, ax=ax, label="pairs")
    else:
        ax.text(50, 50, "no pairs above epsilon", ha="center", va="center")
    ax.set_xlim(0, 100)
    ax.set_ylim(0, 100)
    ax.set_xlabel("input similarity")
    ax.set_ylabel("output similarity")
    ax.set_title(label or "input/output similarity")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def save_violin_svg(scores_by_label: Mapping[str, Sequence[float]], path) -> None:
    labels = list(scores_by_label)
    fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(labels)), 4))
    if labels:
        data = [list(scores_by_label[k]) for k in labels]
        parts = ax.violinplot(data, showmeans=True, showmedians=False, showextrema=False)
        if "cmeans" in parts:
            parts["cmeans"].set_color("red")
        for i, scores in enumerate(data, start=1):
            ordered = sorted(scores)
            n = len(ordered)
            q1 = ordered[max(0, (n + 3) // 4 - 1)]
            q3 = ordered[max(0, (3 * n + 3) // 4 - 1)]
            ax.hlines([q1, q3], i - 0.2, i + 0.2, linestyles="dashed", linewidth=0.8)
        ax.set_xticks(range(1, len(labels) + 1))
        ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("score")
    ax.set_ylim(-2, 102)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
