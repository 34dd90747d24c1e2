"""Report rendering: JSON (primary), per-item CSV, and a compact text
summary (one event-recognition table, one open-question table).

Output bytes are a pure function of the evaluation outcome plus the
metadata passed in — key order, float repr, and row ordering are pinned so
reruns with a fixed seed reproduce the files exactly.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .harness import EvalOutcome, ModelEval


def _model_section(m: ModelEval) -> dict:
    er_items = [
        {
            "clip_id": j.clip_id,
            "template_id": j.template_id,
            "kind": "er",
            "gold": j.gold.short(),
            "predicted": j.predicted.short(),
            "is_true_event": j.is_true_event,
        }
        for j in m.judgements
    ]
    # attach turn indexes and raw responses from the transcripts
    for item in er_items:
        entry = m.transcripts[item["clip_id"]].entry_for(item["template_id"])
        item["turn_index"] = entry.instance.turn_index if entry else -1
        item["raw"] = entry.raw_response if entry else ""
    oq_items = [
        {
            "clip_id": i["clip_id"],
            "template_id": i["template_id"],
            "kind": "oq",
            "turn_index": i["turn_index"],
            "hypothesis": i["hypothesis"],
            "reference": i["reference"],
            "bleu": i["bleu"],
            "bertscore": i["bertscore"],
        }
        for i in m.oq_items
    ]
    per_item = sorted(er_items + oq_items, key=lambda r: (r["clip_id"], r["turn_index"]))
    section = {
        "ar": {
            "true_events": m.ar.true_events,
            "false_events": m.ar.false_events,
            "ar": m.ar.ar,
        },
        "bleu": {
            "score": m.bleu.score,
            "precisions": list(m.bleu.precisions),
            "brevity_penalty": m.bleu.brevity_penalty,
            "hyp_len": m.bleu.hyp_len,
            "ref_len": m.bleu.ref_len,
        },
        "bertscore": (
            {
                "precision": m.bertscore.precision,
                "recall": m.bertscore.recall,
                "f1": m.bertscore.f1,
            }
            if m.bertscore is not None
            else None
        ),
        "error_turns": m.error_turns,
        "per_item": per_item,
    }
    return section


def build_report(outcome: EvalOutcome, metadata: dict) -> dict:
    return {
        "metadata": dict(metadata, catalog_version=outcome.catalog_version),
        "models": {name: _model_section(m) for name, m in sorted(outcome.models.items())},
    }


def report_json_bytes(report: dict) -> bytes:
    return (json.dumps(report, indent=2, sort_keys=True) + "\n").encode("utf-8")


_CSV_COLUMNS = [
    "model",
    "clip_id",
    "turn_index",
    "template_id",
    "kind",
    "gold",
    "predicted",
    "is_true_event",
    "hypothesis",
    "reference",
    "bleu",
    "bert_precision",
    "bert_recall",
    "bert_f1",
    "raw",
]


def per_item_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=_CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for model in sorted(report["models"]):
        for item in report["models"][model]["per_item"]:
            row = {
                "model": model,
                "clip_id": item["clip_id"],
                "turn_index": item["turn_index"],
                "template_id": item["template_id"],
                "kind": item["kind"],
            }
            if item["kind"] == "er":
                row.update(
                    gold=item["gold"],
                    predicted=item["predicted"],
                    is_true_event=str(item["is_true_event"]).lower(),
                    raw=item["raw"],
                )
            else:
                bs = item["bertscore"] or {}
                row.update(
                    hypothesis=item["hypothesis"],
                    reference=item["reference"],
                    bleu=f"{item['bleu']:.4f}",
                    bert_precision=f"{bs['precision']:.6f}" if bs else "",
                    bert_recall=f"{bs['recall']:.6f}" if bs else "",
                    bert_f1=f"{bs['f1']:.6f}" if bs else "",
                )
            writer.writerow(row)
    return buf.getvalue()


def summary_table(report: dict) -> str:
    """Two plain-text tables: event recognition, then open questions."""
    lines = ["Event recognition", ""]
    lines.append(f"{'Model':<16} {'True Events':>12} {'False Events':>13} {'AR':>7}")
    for model in sorted(report["models"]):
        ar = report["models"][model]["ar"]
        lines.append(
            f"{model:<16} {ar['true_events']:>12d} {ar['false_events']:>13d} "
            f"{100.0 * ar['ar']:>7.1f}"
        )
    lines += ["", "Open questions", ""]
    lines.append(f"{'Model':<16} {'BLEU':>7} {'Precision':>10} {'Recall':>8} {'F1':>7}")
    for model in sorted(report["models"]):
        section = report["models"][model]
        bleu = section["bleu"]["score"]
        bs = section["bertscore"]
        if bs:
            lines.append(
                f"{model:<16} {bleu:>7.1f} {bs['precision']:>10.3f} "
                f"{bs['recall']:>8.3f} {bs['f1']:>7.3f}"
            )
        else:
            lines.append(f"{model:<16} {bleu:>7.1f} {'-':>10} {'-':>8} {'-':>7}")
    return "\n".join(lines) + "\n"


def write_report_files(report: dict, out_dir: str | Path, figures: bool = True) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": out / "report.json",
        "per_item": out / "per_item.csv",
        "summary": out / "summary.txt",
    }
    paths["report"].write_bytes(report_json_bytes(report))
    paths["per_item"].write_text(per_item_csv(report), encoding="utf-8")
    paths["summary"].write_text(summary_table(report), encoding="utf-8")
    if figures:
        from .figures import render_report_figures

        for name, p in render_report_figures(report, out / "figures").items():
            paths[f"figure_{name}"] = p
    return paths


def recompute_ar_from_items(report: dict, model: str) -> float:
    """AR recomputed from the report's own per-item records."""
    items = [i for i in report["models"][model]["per_item"] if i["kind"] == "er"]
    true_events = sum(1 for i in items if i["is_true_event"])
    return true_events / len(items)
