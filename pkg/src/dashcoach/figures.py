"""Matplotlib renderings of the evaluation report.

Two charts land next to the delimited output: accuracy rate per model,
and the open-question scores (BLEU on its own axis, BERTScore P/R/F1
grouped). Files are PNG; they are illustrative output, not part of the
byte-golden report surface.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

plt.rcParams.update(
    {
        "figure.figsize": (6.0, 3.6),
        "axes.grid": True,
        "grid.alpha": 0.3,
        "axes.axisbelow": True,
        "font.size": 10,
    }
)

_BAR_COLOR = "#4878a8"
_GROUP_COLORS = ("#4878a8", "#6aa66a", "#c08a44")


def render_ar_figure(report: dict, path: Path):
    models = sorted(report["models"])
    values = [100.0 * report["models"][m]["ar"]["ar"] for m in models]
    fig, ax = plt.subplots()
    ax.bar(models, values, color=_BAR_COLOR, width=0.5)
    ax.set_ylabel("Accuracy rate (%)")
    ax.set_ylim(0, 100)
    ax.set_title("Event recognition")
    for i, v in enumerate(values):
        ax.annotate(f"{v:.1f}", (i, v), ha="center", va="bottom", fontsize=9)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_oq_figure(report: dict, path: Path):
    models = sorted(report["models"])
    bleu = [report["models"][m]["bleu"]["score"] for m in models]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.6))

    ax1.bar(models, bleu, color=_BAR_COLOR, width=0.5)
    ax1.set_ylabel("BLEU")
    ax1.set_title("Open questions: BLEU")

    width = 0.25
    offsets = (-width, 0.0, width)
    labels = ("precision", "recall", "f1")
    for off, key, color in zip(offsets, labels, _GROUP_COLORS):
        values = []
        for m in models:
            bs = report["models"][m]["bertscore"]
            values.append(bs[key] if bs else 0.0)
        xs = [i + off for i in range(len(models))]
        ax2.bar(xs, values, width=width, label=key, color=color)
    ax2.set_xticks(range(len(models)))
    ax2.set_xticklabels(models)
    ax2.set_ylim(0, 1)
    ax2.set_ylabel("BERTScore")
    ax2.set_title("Open questions: BERTScore")
    ax2.legend(fontsize=8)

    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_report_figures(report: dict, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "ar_by_model": out / "ar_by_model.png",
        "open_question_scores": out / "open_question_scores.png",
    }
    render_ar_figure(report, paths["ar_by_model"])
    render_oq_figure(report, paths["open_question_scores"])
    return paths
