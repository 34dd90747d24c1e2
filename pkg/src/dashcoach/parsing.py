"""Normalization and classification of raw model responses.

Models not instruction-tuned on this task tend to wrap answers in
assistant boilerplate ("Sure! ...", "As an AI assistant, I ..."). The
rules here make that cleanup explicit, versioned data instead of a manual
step: normalization strips role prefixes and leading filler sentences,
then kind-specific classifiers turn the remainder into a ParsedAnswer.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from .catalog import BINARY, CATEGORICAL, OPEN, Choice, InstructionTemplate

AFFIRMATIVE = "affirmative"
NEGATIVE = "negative"
CHOICE = "choice"
EXPLANATION = "explanation"
UNPARSEABLE = "unparseable"


@dataclass(frozen=True)
class ParsedAnswer:
    variant: str
    label: str | None = None  # choice answers
    text: str | None = None  # explanations
    raw: str | None = None  # unparseable answers keep the original

    @classmethod
    def affirmative(cls) -> "ParsedAnswer":
        return cls(AFFIRMATIVE)

    @classmethod
    def negative(cls) -> "ParsedAnswer":
        return cls(NEGATIVE)

    @classmethod
    def choice(cls, label: str) -> "ParsedAnswer":
        return cls(CHOICE, label=label)

    @classmethod
    def explanation(cls, text: str) -> "ParsedAnswer":
        return cls(EXPLANATION, text=text)

    @classmethod
    def unparseable(cls, raw: str) -> "ParsedAnswer":
        return cls(UNPARSEABLE, raw=raw)

    def matches(self, other: "ParsedAnswer") -> bool:
        """Exact match by variant and label; unparseable never matches."""
        if self.variant == UNPARSEABLE or other.variant == UNPARSEABLE:
            return False
        if self.variant != other.variant:
            return False
        if self.variant == CHOICE:
            return self.label == other.label
        return True

    def short(self) -> str:
        """Compact report form: yes / no / <label> / sentinel."""
        if self.variant == AFFIRMATIVE:
            return "yes"
        if self.variant == NEGATIVE:
            return "no"
        if self.variant == CHOICE:
            return self.label or ""
        if self.variant == EXPLANATION:
            return "<explanation>"
        return "<unparseable>"


# -- normalization ----------------------------------------------------------

# boundary for the leading-boilerplate scan; colon included so that
# "As an AI assistant, I can describe the scene: ..." splits off cleanly
_SEGMENT = re.compile(r"^([^.!?:]*[.!?:]+)\s*(.*)$", re.DOTALL)


class NormalizationRuleSet:
    def __init__(self, greeting_patterns: Sequence[str], role_prefixes: Sequence[str]):
        self.greeting_patterns = [re.compile(p, re.IGNORECASE) for p in greeting_patterns]
        self.role_prefixes = [p.lower() for p in role_prefixes]

    def is_greeting(self, segment: str) -> bool:
        core = segment.strip().rstrip(".!?:,").strip()
        if not core:
            return True
        return any(p.fullmatch(core) for p in self.greeting_patterns)


def load_rules(path: str | Path) -> NormalizationRuleSet:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return NormalizationRuleSet(doc["greeting_patterns"], doc["role_prefixes"])


def default_rules() -> NormalizationRuleSet:
    doc = json.loads(
        resources.files("dashcoach.data").joinpath("normalization_rules.json").read_text("utf-8")
    )
    return NormalizationRuleSet(doc["greeting_patterns"], doc["role_prefixes"])


def normalize(raw: str, rules: NormalizationRuleSet) -> str:
    """Strip role prefixes and leading filler sentences; collapse whitespace.

    Total and idempotent: prefixes and filler are stripped to a fixpoint,
    so applying the function twice equals applying it once.
    """
    s = re.sub(r"\s+", " ", raw).strip()

    stripped = True
    while stripped:
        stripped = False
        low = s.lower()
        for prefix in rules.role_prefixes:
            if low.startswith(prefix):
                s = s[len(prefix):].lstrip()
                stripped = True
                break

    while True:
        m = _SEGMENT.match(s)
        if not m:
            break
        head, rest = m.group(1), m.group(2)
        if rest and rules.is_greeting(head):
            s = rest
            continue
        break

    return s.strip()


# -- classification ---------------------------------------------------------

_WORD = re.compile(r"[a-z']+")

_NEGATION_TOKENS = {"no", "not", "never", "none", "nothing", "nope", "cannot"}
_AFFIRMATIVE_TOKENS = {
    "yes",
    "yeah",
    "yep",
    "sure",
    "certainly",
    "absolutely",
    "definitely",
    "indeed",
    "affirmative",
    "correct",
    "visible",
    "happened",
    "happens",
    "occurred",
    "occurs",
}
_AFFIRMATIVE_PHRASES = (
    "there is a",
    "there are",
    "there was",
    "there were",
    "i can see",
    "can be seen",
    "does occur",
    "did occur",
    "it appears",
    "it looks like",
    "it did",
)


def classify_binary(text: str) -> ParsedAnswer:
    """Yes/no classification of a normalized response.

    A leading yes/no token decides immediately; otherwise negation rules
    run before affirmative keyword rules ("there is no ..." must not hit
    the "there is" cue). Anything else is unparseable.
    """
    tokens = _WORD.findall(text.lower())
    if not tokens:
        return ParsedAnswer.unparseable(text)
    if tokens[0] == "yes":
        return ParsedAnswer.affirmative()
    if tokens[0] == "no":
        return ParsedAnswer.negative()
    if any(t in _NEGATION_TOKENS or t.endswith("n't") for t in tokens):
        return ParsedAnswer.negative()
    low = " ".join(tokens)
    if any(t in _AFFIRMATIVE_TOKENS for t in tokens):
        return ParsedAnswer.affirmative()
    if any(phrase in low for phrase in _AFFIRMATIVE_PHRASES):
        return ParsedAnswer.affirmative()
    return ParsedAnswer.unparseable(text)


def _as_choice(c) -> Choice:
    return c if isinstance(c, Choice) else Choice(label=str(c))


def classify_choice(text: str, choices: Sequence[Choice | str]) -> ParsedAnswer:
    """Whole-word, case-insensitive label match over a normalized response.

    The earliest occurrence in the text wins; ties at the same position
    break by catalog order. Aliases (typo forms) match but the canonical
    label is returned. Labels are matched literally — paraphrases are a
    documented non-goal.
    """
    parsed = [_as_choice(c) for c in choices]
    if len(parsed) < 2:
        raise ValueError("classify_choice needs >= 2 choices")
    best: tuple[int, int] | None = None  # (position, catalog index)
    best_label: str | None = None
    for idx, choice in enumerate(parsed):
        pos: int | None = None
        for form in choice.all_forms():
            m = re.search(rf"\b{re.escape(form)}\b", text, re.IGNORECASE)
            if m and (pos is None or m.start() < pos):
                pos = m.start()
        if pos is None:
            continue
        key = (pos, idx)
        if best is None or key < best:
            best = key
            best_label = choice.label
    if best_label is None:
        return ParsedAnswer.unparseable(text)
    return ParsedAnswer.choice(best_label)


def classify_for_template(template: InstructionTemplate, normalized: str) -> ParsedAnswer:
    """Dispatch to the classifier matching the instruction kind."""
    if template.kind == BINARY:
        return classify_binary(normalized)
    if template.kind == CATEGORICAL:
        return classify_choice(normalized, template.choices)
    if template.kind == OPEN:
        if normalized.strip():
            return ParsedAnswer.explanation(normalized)
        return ParsedAnswer.unparseable(normalized)
    raise ValueError(f"unknown template kind {template.kind!r}")


def parse_response(raw: str, template: InstructionTemplate, rules: NormalizationRuleSet) -> ParsedAnswer:
    """normalize + classify in one step."""
    return classify_for_template(template, normalize(raw, rules))


# -- curated corpus ---------------------------------------------------------

def load_corpus(path: str | Path) -> list[dict]:
    """Curated response corpus: JSON lines with raw text, kind, and the
    hand-assigned expected answer (plus the expected normalized form where
    the row exercises normalization)."""
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            rows.append(json.loads(line))
    return rows


def expected_answer(row: dict) -> ParsedAnswer:
    exp = row["expected"]
    variant = exp["variant"]
    if variant == CHOICE:
        return ParsedAnswer.choice(exp["label"])
    if variant == EXPLANATION:
        return ParsedAnswer.explanation(exp["text"])
    if variant == UNPARSEABLE:
        return ParsedAnswer(UNPARSEABLE, raw=exp.get("raw"))
    return ParsedAnswer(variant)
