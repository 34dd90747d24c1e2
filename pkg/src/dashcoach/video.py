"""Narrow frame-decoding interface over clip media.

Two concrete sources:

* a directory of image frames (PNG/JPEG), used for lossless test fixtures
  and any pre-extracted footage;
* a video container file (.mp4/.avi/...), decoded through OpenCV.

Both expose frame lookup by *fraction* of the stream (0 <= f < 1), so the
caller owns the clip duration and the sampling policy.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DecodeError

IMAGE_EXTS = (".png", ".jpg", ".jpeg", ".bmp")
VIDEO_EXTS = (".mp4", ".avi", ".mkv", ".mov", ".webm")


class ImageDirSource:
    """Clip stored as an ordered directory of image frames."""

    def __init__(self, path: str | Path, camera: str = ""):
        self.path = Path(path)
        self.camera = camera
        self._files = sorted(
            p for p in self.path.iterdir() if p.suffix.lower() in IMAGE_EXTS
        )
        if not self._files:
            raise DecodeError(f"no image frames in {self.path}", camera=camera, path=str(path))

    def frame_count(self) -> int:
        return len(self._files)

    def frame_at(self, fraction: float) -> np.ndarray:
        from PIL import Image

        idx = min(int(fraction * len(self._files)), len(self._files) - 1)
        idx = max(idx, 0)
        with Image.open(self._files[idx]) as im:
            return np.asarray(im.convert("RGB"))

    def close(self):
        pass


class OpenCvSource:
    """Clip stored as a video container, decoded with OpenCV."""

    def __init__(self, path: str | Path, camera: str = ""):
        import cv2

        self.path = Path(path)
        self.camera = camera
        self._cv2 = cv2
        self._cap = cv2.VideoCapture(str(path))
        if not self._cap.isOpened():
            raise DecodeError(f"cannot open video {path}", camera=camera, path=str(path))
        self._frames = int(self._cap.get(cv2.CAP_PROP_FRAME_COUNT))
        fps = self._cap.get(cv2.CAP_PROP_FPS) or 0.0
        self._duration_ms = (self._frames / fps * 1000.0) if fps > 0 else 0.0
        if self._frames < 1:
            self._cap.release()
            raise DecodeError(f"video has no decodable frames: {path}", camera=camera, path=str(path))

    def frame_count(self) -> int:
        return self._frames

    def frame_at(self, fraction: float) -> np.ndarray:
        cv2 = self._cv2
        if self._duration_ms > 0:
            self._cap.set(cv2.CAP_PROP_POS_MSEC, fraction * self._duration_ms)
        else:
            idx = min(int(fraction * self._frames), self._frames - 1)
            self._cap.set(cv2.CAP_PROP_POS_FRAMES, idx)
        ok, frame = self._cap.read()
        if not ok:
            # seek past the last packet: fall back to the final frame
            self._cap.set(cv2.CAP_PROP_POS_FRAMES, self._frames - 1)
            ok, frame = self._cap.read()
        if not ok:
            raise DecodeError(
                f"decode failure at fraction {fraction:.3f} of {self.path}",
                camera=self.camera,
                path=str(self.path),
            )
        return cv2.cvtColor(frame, cv2.COLOR_BGR2RGB)

    def close(self):
        self._cap.release()


def open_clip(path: str | Path, camera: str = ""):
    """Open a frame source for a clip path (directory or container file)."""
    p = Path(path)
    if not p.exists():
        raise DecodeError(f"clip path does not exist: {p}", camera=camera, path=str(p))
    if p.is_dir():
        return ImageDirSource(p, camera=camera)
    if p.suffix.lower() in VIDEO_EXTS:
        return OpenCvSource(p, camera=camera)
    raise DecodeError(f"unsupported clip format: {p}", camera=camera, path=str(p))


def probe_frames(path: str | Path) -> int:
    """Number of decodable frames, 0 if the clip cannot be opened at all."""
    try:
        src = open_clip(path)
    except DecodeError:
        return 0
    try:
        return src.frame_count()
    finally:
        src.close()
