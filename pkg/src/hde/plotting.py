"""Figures rendered next to the harness tables."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from hde.harness import VariantSummary  # noqa: E402
from hde.metrics import CONDITION_LABELS, Condition, ConditionSummary  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 100,
    "savefig.bbox": "tight",
}

COLORS = ("#3b6ea5", "#d07a2c", "#5a9e5a", "#8c5a9e")


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # strip the version stamp so reruns produce the same bytes
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def _bars(ax, labels: Sequence[str], series: dict[str, Sequence[float | None]]) -> None:
    n = len(series)
    width = 0.8 / max(n, 1)
    for i, (name, values) in enumerate(series.items()):
        xs = [j + (i - (n - 1) / 2) * width for j in range(len(labels))]
        ax.bar(xs, [v or 0.0 for v in values], width, label=name, color=COLORS[i % len(COLORS)])
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.legend(frameon=False)


def resilience_figure(docs: Sequence[dict], path: str | Path) -> Path:
    labels = [f"{d['run']['system']} {d['run'].get('perturbation') or ''}".strip() for d in docs]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 3))
        _bars(ax, labels, {
            "SysAR": [d["raw"]["sys_ar"] for d in docs],
            "ArCo": [d["raw"]["ar_co"] for d in docs],
        })
        ax.set_ylim(0, 1.05)
        ax.set_ylabel("score")
        ax.set_title("Resilience after perturbation")
        return _save(fig, path)


def ablation_figure(summary: Sequence[VariantSummary], path: str | Path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 3))
        _bars(ax, [s.label for s in summary], {
            "Doctrinal Accuracy": [s.da for s in summary],
            "Cross-Referencing": [s.cr for s in summary],
        })
        ax.set_ylim(0, 1.05)
        ax.set_title("Module contributions")
        return _save(fig, path)


def acs_figure(summary: dict[Condition, ConditionSummary], path: str | Path) -> Path:
    conds = list(summary)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3))
        ax.bar([CONDITION_LABELS[c] for c in conds], [summary[c].delta_acs for c in conds],
               color=[COLORS[i % len(COLORS)] for i in range(len(conds))])
        ax.axhline(0, color="black", linewidth=0.6)
        ax.set_ylabel("mean ΔACS")
        ax.set_title("Learning gain by condition")
        return _save(fig, path)
