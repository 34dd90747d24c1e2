"""Accuracy rate over event-recognition judgements.

An answer is a true event when the predicted label matches the gold label
exactly (same variant, same choice); unparseable predictions count as
false events. AR = true / (true + false).
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import MetricError
from ..parsing import ParsedAnswer


@dataclass(frozen=True)
class ERJudgement:
    clip_id: str
    template_id: str
    gold: ParsedAnswer
    predicted: ParsedAnswer
    is_true_event: bool


@dataclass(frozen=True)
class ARResult:
    true_events: int
    false_events: int
    ar: float


def judge(clip_id: str, template_id: str, gold: ParsedAnswer, predicted: ParsedAnswer) -> ERJudgement:
    return ERJudgement(
        clip_id=clip_id,
        template_id=template_id,
        gold=gold,
        predicted=predicted,
        is_true_event=predicted.matches(gold),
    )


def accuracy_rate(judgements: list[ERJudgement]) -> ARResult:
    if not judgements:
        raise MetricError("accuracy rate is undefined on an empty judgement list")
    true_events = sum(1 for j in judgements if j.is_true_event)
    false_events = len(judgements) - true_events
    return ARResult(
        true_events=true_events,
        false_events=false_events,
        ar=true_events / (true_events + false_events),
    )
