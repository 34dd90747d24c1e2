"""Frame extraction, resizing, and side-by-side merging.

The model consumes K composite frames per clip, each the horizontal
concatenation of one road-facing and one driver-facing frame sampled at
the same midpoint-uniform timestamps t_i = (i + 0.5) * D / K.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .errors import DecodeError
from .manifest import ClipPair
from .video import open_clip

LAYOUTS = ("road_left", "road_right")


@dataclass(frozen=True)
class MergePolicy:
    """How many frames to sample and the per-camera raster size."""

    sample_count: int = 8
    width: int = 640
    height: int = 480
    layout: str = "road_left"

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError(f"sample_count must be >= 1, got {self.sample_count}")
        if self.width < 16 or self.height < 16:
            raise ValueError(f"per-camera size must be >= 16x16, got {self.width}x{self.height}")
        if self.layout not in LAYOUTS:
            raise ValueError(f"layout must be one of {LAYOUTS}, got {self.layout!r}")

    def digest(self) -> str:
        """Stable hash of the policy, used to key the frame cache."""
        doc = json.dumps(
            {
                "sample_count": self.sample_count,
                "width": self.width,
                "height": self.height,
                "layout": self.layout,
            },
            sort_keys=True,
        )
        return hashlib.sha256(doc.encode("utf-8")).hexdigest()[:16]


@dataclass
class FrameSet:
    """K same-sized RGB frames from one camera with their sample times."""

    clip_id: str
    frames: list[np.ndarray]
    timestamps: list[float]
    width: int
    height: int

    def __post_init__(self):
        if len(self.frames) != len(self.timestamps):
            raise ValueError("frames and timestamps length mismatch")
        for f in self.frames:
            if f.shape[:2] != (self.height, self.width):
                raise ValueError(
                    f"frame shape {f.shape[:2]} != policy size {(self.height, self.width)}"
                )
        for a, b in zip(self.timestamps, self.timestamps[1:]):
            if b <= a:
                raise ValueError("timestamps must be strictly increasing")


@dataclass
class MergedFrameSet:
    """K composite frames, each road|driver (or swapped) side by side."""

    clip_id: str
    frames: list[np.ndarray]
    timestamps: list[float]
    width: int  # composite width = 2 x per-camera width
    height: int
    layout: str = "road_left"
    policy_digest: str = ""


def sample_timestamps(duration_s: float, k: int) -> list[float]:
    """Midpoint-uniform sampling: t_i = (i + 0.5) * D / K."""
    return [(i + 0.5) * duration_s / k for i in range(k)]


def _resize(frame: np.ndarray, width: int, height: int) -> np.ndarray:
    if frame.shape[0] == height and frame.shape[1] == width:
        return frame
    im = Image.fromarray(frame)
    return np.asarray(im.resize((width, height), Image.BILINEAR))


def extract_frames(clip: ClipPair, policy: MergePolicy) -> tuple[FrameSet, FrameSet]:
    """Sample K frames per camera at midpoint-uniform times and resize.

    Raises DecodeError naming the camera that failed.
    """
    if clip.duration_s <= 0:
        raise DecodeError(f"clip {clip.id!r} has non-positive duration", path=clip.road_video)
    times = sample_timestamps(clip.duration_s, policy.sample_count)
    out: list[FrameSet] = []
    for camera, path in (("road", clip.road_video), ("driver", clip.driver_video)):
        src = open_clip(path, camera=camera)
        try:
            frames = [
                _resize(src.frame_at(t / clip.duration_s), policy.width, policy.height)
                for t in times
            ]
        finally:
            src.close()
        out.append(
            FrameSet(
                clip_id=clip.id,
                frames=frames,
                timestamps=list(times),
                width=policy.width,
                height=policy.height,
            )
        )
    return out[0], out[1]


def merge_side_by_side(road: FrameSet, driver: FrameSet, policy: MergePolicy) -> MergedFrameSet:
    """Concatenate paired frames horizontally per the policy layout."""
    if len(road.frames) != len(driver.frames):
        raise ValueError(
            f"frame-count mismatch: road has {len(road.frames)}, driver has {len(driver.frames)}"
        )
    for fs in (road, driver):
        if (fs.width, fs.height) != (policy.width, policy.height):
            raise ValueError(
                f"dimension mismatch: frames are {fs.width}x{fs.height}, "
                f"policy wants {policy.width}x{policy.height}"
            )
    merged = []
    for r, d in zip(road.frames, driver.frames):
        left, right = (r, d) if policy.layout == "road_left" else (d, r)
        merged.append(np.concatenate([left, right], axis=1))
    return MergedFrameSet(
        clip_id=road.clip_id,
        frames=merged,
        timestamps=list(road.timestamps),
        width=2 * policy.width,
        height=policy.height,
        layout=policy.layout,
        policy_digest=policy.digest(),
    )


def merge_clip(clip: ClipPair, policy: MergePolicy) -> MergedFrameSet:
    """extract_frames + merge_side_by_side in one step."""
    road, driver = extract_frames(clip, policy)
    return merge_side_by_side(road, driver, policy)
