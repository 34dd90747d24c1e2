"""Coaching: detected events -> database alignment -> driver/manager reports.

A dialogue transcript is reduced to a situation record (risky events with
their transcript evidence, categorical context, open-question answers),
matched against the coaching database by event label, and rendered as
deterministic templated text. An LLM endpoint can optionally rewrite the
templated report; any failure there degrades back to the template.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .catalog import Catalog
from .errors import CoachingError, GatewayError
from .gateway import ChatTurn, DialogueTranscript, GenerationParams, InferenceClient, InferenceRequest, TranscriptEntry
from .parsing import AFFIRMATIVE, CHOICE, EXPLANATION

log = logging.getLogger(__name__)

SEVERITIES = ("critical", "warn", "info")
NO_EVENTS_PHRASE = "No risky events detected"


@dataclass(frozen=True)
class CoachingEntry:
    event_label: str
    severity: str
    driver_guidance: str
    manager_guidance: str


class CoachingDB:
    def __init__(self, entries: list[CoachingEntry], version: str = "0"):
        self.version = version
        self.entries = list(entries)
        self._by_label: dict[str, CoachingEntry] = {}
        for e in entries:
            if e.event_label in self._by_label:
                raise CoachingError(f"duplicate coaching entry for {e.event_label!r}")
            if e.severity not in SEVERITIES:
                raise CoachingError(f"{e.event_label!r}: unknown severity {e.severity!r}")
            if not e.driver_guidance or not e.manager_guidance:
                raise CoachingError(f"{e.event_label!r}: guidance strings must be non-empty")
            self._by_label[e.event_label] = e

    def lookup(self, event_label: str) -> CoachingEntry | None:
        return self._by_label.get(event_label)


def parse_db(doc: dict) -> CoachingDB:
    entries = [
        CoachingEntry(
            event_label=e["event_label"],
            severity=e["severity"],
            driver_guidance=e["driver_guidance"],
            manager_guidance=e["manager_guidance"],
        )
        for e in doc.get("entries", [])
    ]
    return CoachingDB(entries, version=str(doc.get("version", "0")))


def load_db(path: str | Path) -> CoachingDB:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CoachingError(f"coaching database not found: {path}") from None
    except json.JSONDecodeError as e:
        raise CoachingError(f"coaching database parse error at line {e.lineno}: {e.msg}") from e
    return parse_db(doc)


def default_db() -> CoachingDB:
    doc = json.loads(resources.files("dashcoach.data").joinpath("coaching_db.json").read_text("utf-8"))
    return parse_db(doc)


@dataclass
class SituationRecord:
    clip_id: str
    detected_events: list[tuple[str, TranscriptEntry]] = field(default_factory=list)
    context_labels: dict[str, str] = field(default_factory=dict)
    open_answers: dict[str, str] = field(default_factory=dict)


@dataclass
class CoachingReport:
    clip_id: str
    driver_text: str
    manager_text: str
    events: list[tuple[str, str, str]]  # (event_label, severity, guidance excerpt)
    uncoached_events: list[str]
    generated_by: str  # "templated" | "llm_composed"

    def to_dict(self) -> dict:
        return {
            "clip_id": self.clip_id,
            "driver_text": self.driver_text,
            "manager_text": self.manager_text,
            "events": [
                {"event_label": label, "severity": sev, "guidance": excerpt}
                for label, sev, excerpt in self.events
            ],
            "uncoached_events": list(self.uncoached_events),
            "generated_by": self.generated_by,
        }


def detect_events(transcript: DialogueTranscript, catalog: Catalog) -> SituationRecord:
    """Map affirmative answers to event labels, choices to context, and
    explanations to open answers."""
    record = SituationRecord(clip_id=transcript.clip_id)
    for entry in transcript.entries:
        template = catalog.template(entry.instance.template_id)  # raises on mismatch
        parsed = entry.parsed
        if parsed.variant == AFFIRMATIVE and template.event_label:
            record.detected_events.append((template.event_label, entry))
        elif parsed.variant == CHOICE and template.context_key:
            record.context_labels[template.context_key] = parsed.label or ""
        elif parsed.variant == EXPLANATION:
            record.open_answers[template.id] = parsed.text or ""
    return record


def align_with_db(record: SituationRecord, db: CoachingDB) -> list[CoachingEntry]:
    """One db entry per detected event, critical first, ties by label.

    Events missing from the database are logged and omitted here; the
    composed report still names them under uncoached_events.
    """
    entries: dict[str, CoachingEntry] = {}
    for label, _evidence in record.detected_events:
        found = db.lookup(label)
        if found is not None:
            entries[label] = found
        else:
            log.warning("clip %s: event %r has no coaching database entry", record.clip_id, label)
    order = {sev: i for i, sev in enumerate(SEVERITIES)}
    return sorted(entries.values(), key=lambda e: (order[e.severity], e.event_label))


def uncoached_events(record: SituationRecord, db: CoachingDB) -> list[str]:
    labels = sorted({label for label, _ in record.detected_events})
    return [label for label in labels if db.lookup(label) is None]


def _excerpt(guidance: str) -> str:
    """First sentence of a guidance string."""
    for stop in (". ", "! ", "? "):
        if stop in guidance:
            return guidance.split(stop, 1)[0] + stop.strip()
    return guidance


_CONTEXT_TITLES = (
    ("weather", "weather"),
    ("road_condition", "road condition"),
    ("visibility", "visibility"),
    ("road_info", "road information"),
)


def _context_line(record: SituationRecord) -> str:
    parts = [
        f"{title} {record.context_labels[key]}"
        for key, title in _CONTEXT_TITLES
        if key in record.context_labels
    ]
    for key in sorted(record.context_labels):
        if key not in {k for k, _ in _CONTEXT_TITLES}:
            parts.append(f"{key} {record.context_labels[key]}")
    if not parts:
        return "Context: not determined."
    return "Context: " + ", ".join(parts) + "."


def _templated_driver_text(record: SituationRecord, entries: list[CoachingEntry]) -> str:
    lines = [f"Coaching summary for clip {record.clip_id}", "", _context_line(record), ""]
    if not entries and not record.detected_events:
        lines.append(f"{NO_EVENTS_PHRASE}. Keep up the safe driving.")
    else:
        lines.append("Events needing attention:")
        for e in entries:
            lines.append(f"  [{e.severity}] {e.event_label}: {e.driver_guidance}")
    if record.open_answers:
        lines.append("")
        for template_id in sorted(record.open_answers):
            lines.append(f"Observed ({template_id}): {record.open_answers[template_id]}")
    return "\n".join(lines) + "\n"


def _templated_manager_text(
    record: SituationRecord, entries: list[CoachingEntry], uncoached: list[str]
) -> str:
    lines = [f"Manager review for clip {record.clip_id}", "", _context_line(record), ""]
    if not entries and not record.detected_events:
        lines.append(f"{NO_EVENTS_PHRASE} in this clip; no manager action required.")
    else:
        lines.append("Detected events and evidence:")
        for e in entries:
            evidence = next(
                (entry for label, entry in record.detected_events if label == e.event_label),
                None,
            )
            where = (
                f"turn {evidence.instance.turn_index} ({evidence.instance.template_id})"
                if evidence is not None
                else "n/a"
            )
            lines.append(f"  [{e.severity}] {e.event_label} — evidence: {where}")
            lines.append(f"      {e.manager_guidance}")
        if uncoached:
            lines.append("Uncoached events (no database entry): " + ", ".join(uncoached))
    if record.open_answers:
        lines.append("")
        for template_id in sorted(record.open_answers):
            lines.append(f"Model account ({template_id}): {record.open_answers[template_id]}")
    return "\n".join(lines) + "\n"


def compose_report(
    record: SituationRecord,
    entries: list[CoachingEntry],
    db: CoachingDB,
    llm: InferenceClient | None = None,
    params: GenerationParams = GenerationParams(),
) -> CoachingReport:
    """Render the report. Without an LLM the text is a pure function of
    (record, entries, db); with one, the templated report plus evidence is
    sent as a composition prompt and the response becomes the report text
    (falling back to the template on any endpoint error)."""
    uncoached = uncoached_events(record, db)
    driver_text = _templated_driver_text(record, entries)
    manager_text = _templated_manager_text(record, entries, uncoached)
    events = [(e.event_label, e.severity, _excerpt(e.driver_guidance)) for e in entries]
    generated_by = "templated"

    if llm is not None:
        prompt = (
            "Rewrite the following driving coaching notes as two sections. "
            "Start the first with DRIVER: and the second with MANAGER:.\n\n"
            f"{driver_text}\n{manager_text}"
        )
        request = InferenceRequest(
            media={"video_path": f"coaching:{record.clip_id}"},
            turns=[ChatTurn("user", prompt)],
            params=params,
        )
        try:
            response = llm.infer(request)
        except GatewayError:
            response = None
        if response:
            generated_by = "llm_composed"
            if "DRIVER:" in response and "MANAGER:" in response:
                driver_part, manager_part = response.split("MANAGER:", 1)
                driver_text = driver_part.replace("DRIVER:", "", 1).strip() + "\n"
                manager_text = manager_part.strip() + "\n"
            else:
                driver_text = manager_text = response.strip() + "\n"

    return CoachingReport(
        clip_id=record.clip_id,
        driver_text=driver_text,
        manager_text=manager_text,
        events=events,
        uncoached_events=uncoached,
        generated_by=generated_by,
    )
