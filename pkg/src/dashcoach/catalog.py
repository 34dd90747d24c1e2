"""Instruction template catalog and per-clip expansion.

The default catalog ships as package data: 11 primary event-recognition
templates, 9 follow-ups, and 2 open questions. Follow-ups fire when their
parent is answered affirmatively (conditional mode) or unconditionally
(exhaustive mode, used for scoring).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import CatalogError

BINARY = "binary"
CATEGORICAL = "categorical"
OPEN = "open"
KINDS = (BINARY, CATEGORICAL, OPEN)

EXHAUSTIVE = "exhaustive"
CONDITIONAL = "conditional"


@dataclass(frozen=True)
class Choice:
    label: str
    aliases: tuple[str, ...] = ()

    def all_forms(self) -> tuple[str, ...]:
        return (self.label,) + self.aliases


@dataclass(frozen=True)
class FollowUpRule:
    """Ask the target when the parent's answer parses Affirmative."""

    target_template_id: str


@dataclass(frozen=True)
class InstructionTemplate:
    id: str
    kind: str
    text: str
    choices: tuple[Choice, ...] = ()
    followups: tuple[FollowUpRule, ...] = ()
    event_label: str | None = None
    context_key: str | None = None

    @property
    def er_countable(self) -> bool:
        """Counts toward event-recognition totals (binary or categorical)."""
        return self.kind in (BINARY, CATEGORICAL)


@dataclass(frozen=True)
class InstructionInstance:
    clip_id: str
    template_id: str
    turn_index: int
    parent_instance: int | None = None  # turn_index of the parent, if a follow-up
    conditional: bool = False  # resolved at dialogue time from the parent's answer


class Catalog:
    def __init__(self, templates: list[InstructionTemplate], version: str = "0"):
        self.version = version
        self.templates = list(templates)
        self._by_id = {t.id: t for t in templates}
        self._parent_of: dict[str, str] = {}
        for t in templates:
            for rule in t.followups:
                self._parent_of[rule.target_template_id] = t.id
        self._validate()

    def _validate(self):
        if len(self._by_id) != len(self.templates):
            seen: set[str] = set()
            for t in self.templates:
                if t.id in seen:
                    raise CatalogError(f"duplicate template id {t.id!r}")
                seen.add(t.id)
        targeted: set[str] = set()
        for t in self.templates:
            if t.kind not in KINDS:
                raise CatalogError(f"template {t.id!r}: unknown kind {t.kind!r}")
            if t.kind == CATEGORICAL:
                labels = [c.label for c in t.choices]
                if len(set(labels)) < 2:
                    raise CatalogError(f"template {t.id!r}: categorical needs >= 2 distinct choices")
            for rule in t.followups:
                target = rule.target_template_id
                if target not in self._by_id:
                    raise CatalogError(f"template {t.id!r}: follow-up targets unknown id {target!r}")
                if target in targeted:
                    raise CatalogError(f"follow-up {target!r} referenced by more than one parent")
                targeted.add(target)
                tt = self._by_id[target]
                if tt.kind == CATEGORICAL:
                    raise CatalogError(f"follow-up {target!r} must be binary or open, got categorical")
                if tt.followups:
                    raise CatalogError(f"follow-up {target!r} may not have follow-ups of its own")

    def __len__(self) -> int:
        return len(self.templates)

    def template(self, template_id: str) -> InstructionTemplate:
        try:
            return self._by_id[template_id]
        except KeyError:
            raise CatalogError(f"unknown template id {template_id!r}") from None

    def is_followup(self, template_id: str) -> bool:
        return template_id in self._parent_of

    def parent_id(self, template_id: str) -> str | None:
        return self._parent_of.get(template_id)

    def primary_templates(self) -> list[InstructionTemplate]:
        return [t for t in self.templates if not self.is_followup(t.id)]

    def counts(self) -> dict[str, int]:
        """Primary-ER / follow-up / open-question template counts."""
        primary_er = sum(
            1 for t in self.primary_templates() if t.er_countable
        )
        fuq = sum(1 for t in self.templates if self.is_followup(t.id))
        oq = sum(1 for t in self.primary_templates() if t.kind == OPEN)
        return {"primary_er": primary_er, "followups": fuq, "open_questions": oq}


def _parse_choice(raw) -> Choice:
    if isinstance(raw, str):
        return Choice(label=raw)
    return Choice(label=raw["label"], aliases=tuple(raw.get("aliases", ())))


def _parse_template(entry: dict) -> InstructionTemplate:
    kind = entry["kind"]
    if entry.get("free_text") and kind == BINARY:
        # catalog escape hatch for "Why ..." follow-ups: treat as short
        # free text and drop them from event-recognition scoring
        kind = OPEN
    return InstructionTemplate(
        id=entry["id"],
        kind=kind,
        text=entry["text"],
        choices=tuple(_parse_choice(c) for c in entry.get("choices", ())),
        followups=tuple(FollowUpRule(f["target"]) for f in entry.get("followups", ())),
        event_label=entry.get("event_label"),
        context_key=entry.get("context_key"),
    )


def parse_catalog(doc: dict) -> Catalog:
    if not isinstance(doc, dict) or not isinstance(doc.get("templates"), list):
        raise CatalogError('catalog must be an object with a "templates" array')
    templates = []
    for entry in doc["templates"]:
        try:
            templates.append(_parse_template(entry))
        except KeyError as e:
            raise CatalogError(f"template entry missing field {e.args[0]!r}: {entry}") from None
    return Catalog(templates, version=str(doc.get("version", "0")))


def load_catalog(path: str | Path) -> Catalog:
    path = Path(path)
    if not path.exists():
        raise CatalogError(f"catalog not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise CatalogError(f"catalog parse error at line {e.lineno}: {e.msg}") from e
    return parse_catalog(doc)


def default_catalog_text() -> str:
    return resources.files("dashcoach.data").joinpath("catalog.json").read_text("utf-8")


def default_catalog() -> Catalog:
    return parse_catalog(json.loads(default_catalog_text()))


def expand_for_clip(catalog: Catalog, clip_id: str, mode: str = EXHAUSTIVE) -> list[InstructionInstance]:
    """Expand every template into per-clip instruction instances.

    Order is deterministic: primary templates in catalog order, each
    immediately followed by its follow-ups. In exhaustive mode follow-ups
    are unconditional; in conditional mode they carry a flag and the
    dialogue runner skips them unless the parent parsed Affirmative.
    """
    if mode not in (EXHAUSTIVE, CONDITIONAL):
        raise ValueError(f"mode must be {EXHAUSTIVE!r} or {CONDITIONAL!r}, got {mode!r}")
    instances: list[InstructionInstance] = []
    turn = 0
    for t in catalog.primary_templates():
        parent_turn = turn
        instances.append(InstructionInstance(clip_id=clip_id, template_id=t.id, turn_index=turn))
        turn += 1
        for rule in t.followups:
            instances.append(
                InstructionInstance(
                    clip_id=clip_id,
                    template_id=rule.target_template_id,
                    turn_index=turn,
                    parent_instance=parent_turn,
                    conditional=(mode == CONDITIONAL),
                )
            )
            turn += 1
    return instances
