"""Micro-averaged evaluation that ignores abstentions, plus report files.

Only non-abstain gold labels count toward recall and only non-abstain
predictions toward precision, so a model is never rewarded for
predicting "no relation". On a space without an abstain label the same
formulas reduce to plain accuracy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .core import LabelSpace
from .errors import UnknownLabel


@dataclass(frozen=True)
class EvalReport:
    micro_precision: float
    micro_recall: float
    micro_f1: float
    n_instances: int
    n_gold_labeled: int
    n_pred_labeled: int
    n_correct: int
    per_label: dict[str, dict[str, int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "micro_precision": self.micro_precision,
            "micro_recall": self.micro_recall,
            "micro_f1": self.micro_f1,
            "n_instances": self.n_instances,
            "n_gold_labeled": self.n_gold_labeled,
            "n_pred_labeled": self.n_pred_labeled,
            "n_correct": self.n_correct,
            "per_label": self.per_label,
        }


def micro_f1(golds: Sequence[str], preds: Sequence[str], space: LabelSpace) -> EvalReport:
    """Micro precision/recall/F1 over non-abstain labels; zero denominators
    yield zero metrics rather than errors."""
    if len(golds) != len(preds):
        raise ValueError(f"golds ({len(golds)}) and preds ({len(preds)}) differ in length")
    per_label = {lid: {"gold": 0, "predicted": 0, "correct": 0} for lid in space.ids}
    tp = n_gold = n_pred = 0
    for g, p in zip(golds, preds):
        if g not in space:
            raise UnknownLabel(f"gold label {g!r} not in space {space.dataset_id!r}")
        if p not in space:
            raise UnknownLabel(f"predicted label {p!r} not in space {space.dataset_id!r}")
        per_label[g]["gold"] += 1
        per_label[p]["predicted"] += 1
        if g == p:
            per_label[g]["correct"] += 1
        if not space.is_abstain(g):
            n_gold += 1
            if g == p:
                tp += 1
        if not space.is_abstain(p):
            n_pred += 1
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gold if n_gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvalReport(
        micro_precision=precision,
        micro_recall=recall,
        micro_f1=f1,
        n_instances=len(golds),
        n_gold_labeled=n_gold,
        n_pred_labeled=n_pred,
        n_correct=tp,
        per_label=per_label,
    )


def report_text(report: EvalReport) -> str:
    """Flat key-value rendering; per-label counts use dotted keys."""
    lines = [
        f"micro_precision\t{report.micro_precision!r}",
        f"micro_recall\t{report.micro_recall!r}",
        f"micro_f1\t{report.micro_f1!r}",
        f"n_instances\t{report.n_instances}",
        f"n_gold_labeled\t{report.n_gold_labeled}",
        f"n_pred_labeled\t{report.n_pred_labeled}",
        f"n_correct\t{report.n_correct}",
    ]
    for lid, counts in report.per_label.items():
        for key in ("gold", "predicted", "correct"):
            lines.append(f"label.{lid}.{key}\t{counts[key]}")
    return "\n".join(lines) + "\n"


def report_json(report: EvalReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def save_report(report: EvalReport, txt_path: str | Path, json_path: str | Path) -> None:
    Path(txt_path).write_text(report_text(report), encoding="utf-8")
    Path(json_path).write_text(report_json(report), encoding="utf-8")
