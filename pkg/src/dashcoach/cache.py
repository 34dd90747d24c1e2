"""Content-addressed cache of merged frame sets.

Keyed by (clip id, policy digest) so that re-evaluating several models
against the same manifest never re-decodes video, while any change to the
merge policy forces a clean re-extraction.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .frames import MergedFrameSet, MergePolicy


class FrameCache:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _entry_dir(self, clip_id: str, policy: MergePolicy) -> Path:
        return self.root / f"{clip_id}__{policy.digest()}"

    def has(self, clip_id: str, policy: MergePolicy) -> bool:
        return (self._entry_dir(clip_id, policy) / "meta.json").exists()

    def put(self, merged: MergedFrameSet, policy: MergePolicy) -> Path:
        entry = self._entry_dir(merged.clip_id, policy)
        entry.mkdir(parents=True, exist_ok=True)
        for i, frame in enumerate(merged.frames):
            Image.fromarray(frame).save(entry / f"frame_{i:03d}.png")
        meta = {
            "clip_id": merged.clip_id,
            "timestamps": merged.timestamps,
            "width": merged.width,
            "height": merged.height,
            "layout": merged.layout,
            "policy_digest": policy.digest(),
        }
        (entry / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        return entry

    def get(self, clip_id: str, policy: MergePolicy) -> MergedFrameSet | None:
        entry = self._entry_dir(clip_id, policy)
        meta_path = entry / "meta.json"
        if not meta_path.exists():
            return None
        meta = json.loads(meta_path.read_text())
        frames = []
        for i in range(len(meta["timestamps"])):
            with Image.open(entry / f"frame_{i:03d}.png") as im:
                frames.append(np.asarray(im.convert("RGB")))
        return MergedFrameSet(
            clip_id=meta["clip_id"],
            frames=frames,
            timestamps=meta["timestamps"],
            width=meta["width"],
            height=meta["height"],
            layout=meta["layout"],
            policy_digest=meta["policy_digest"],
        )
