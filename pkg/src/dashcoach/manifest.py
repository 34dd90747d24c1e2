"""Dataset manifest: clip pairs, split index, (de)serialization.

A manifest is UTF-8 JSON: {"clips": [{"id", "road_video", "driver_video",
"audio"?, "duration_s", "split", "gold"?}]}. Media paths may be relative,
in which case they resolve against the manifest file's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ManifestError
from .video import probe_frames

SPLITS = ("train", "valid", "test")


@dataclass(frozen=True)
class ClipPair:
    """One synchronized road-facing + driver-facing recording."""

    id: str
    road_video: str
    driver_video: str
    duration_s: float
    split: str
    audio: str | None = None
    gold: str | None = None

    @property
    def gold_ref(self) -> str:
        """Key into the gold-record file; defaults to the clip id."""
        return self.gold or self.id


@dataclass
class Manifest:
    clips: list[ClipPair]
    by_split: dict[str, list[ClipPair]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.by_split:
            self.by_split = {s: [c for c in self.clips if c.split == s] for s in SPLITS}

    def split_counts(self) -> dict[str, int]:
        return {s: len(self.by_split[s]) for s in SPLITS}

    def clip(self, clip_id: str) -> ClipPair:
        for c in self.clips:
            if c.id == clip_id:
                return c
        raise ManifestError(f"unknown clip id {clip_id!r}")


def _require(entry: dict, key: str, index: int):
    if key not in entry:
        raise ManifestError(f"clip #{index}: missing field {key!r}")
    return entry[key]


def load_manifest(path: str | Path, check_media: bool = True) -> Manifest:
    """Load and validate a manifest file.

    Every clip must have a unique id, duration_s > 0, a known split, and
    (when check_media is set) both video paths present and decodable to at
    least one frame. Audio is a pass-by-reference field and is not checked.
    """
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest not found: {path}")
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        raise ManifestError(f"manifest is empty: {path}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ManifestError(f"manifest parse error at line {e.lineno}: {e.msg}") from e
    if not isinstance(doc, dict) or not isinstance(doc.get("clips"), list):
        raise ManifestError('manifest must be an object with a "clips" array')

    base = path.parent
    clips: list[ClipPair] = []
    seen: set[str] = set()
    for i, entry in enumerate(doc["clips"]):
        cid = _require(entry, "id", i)
        if cid in seen:
            raise ManifestError(f"duplicate clip id {cid!r}")
        seen.add(cid)
        duration = float(_require(entry, "duration_s", i))
        if duration <= 0:
            raise ManifestError(f"clip {cid!r}: duration_s must be > 0, got {duration}")
        split = _require(entry, "split", i)
        if split not in SPLITS:
            raise ManifestError(f"clip {cid!r}: unknown split {split!r}")
        road = str(base / _require(entry, "road_video", i))
        driver = str(base / _require(entry, "driver_video", i))
        audio = entry.get("audio")
        if audio is not None:
            audio = str(base / audio)
        clip = ClipPair(
            id=cid,
            road_video=road,
            driver_video=driver,
            duration_s=duration,
            split=split,
            audio=audio,
            gold=entry.get("gold"),
        )
        if check_media:
            for camera, vpath in (("road", road), ("driver", driver)):
                if not Path(vpath).exists():
                    raise ManifestError(f"clip {cid!r}: {camera} video path does not exist: {vpath}")
                if probe_frames(vpath) < 1:
                    raise ManifestError(f"clip {cid!r}: {camera} video decodes to zero frames: {vpath}")
        clips.append(clip)

    return Manifest(clips=clips)


def serialize_manifest(manifest: Manifest) -> str:
    """Inverse of load_manifest, up to path absolutization."""
    doc = {"clips": []}
    for c in manifest.clips:
        entry: dict = {
            "id": c.id,
            "road_video": c.road_video,
            "driver_video": c.driver_video,
            "duration_s": c.duration_s,
            "split": c.split,
        }
        if c.audio is not None:
            entry["audio"] = c.audio
        if c.gold is not None:
            entry["gold"] = c.gold
        doc["clips"].append(entry)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
