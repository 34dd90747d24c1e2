#!/usr/bin/env python3
"""Generate the checked-in evaluation fixtures.

Writes under tests/data/:

    fixture/clips/<id>/{road,driver}/frame_*.png   synthetic 64x48 footage
    fixture/manifest.json                          3 test clips
    fixture/gold.jsonl                             gold labels + references
    composite_golden.png                           PIL-stitched oracle composite

Gold ER labels are derived from the deterministic stub's answers with a
fixed agree/disagree pattern, so the fixture accuracy rate is stable and
mid-range. The composite golden is produced with PIL paste — independent
of the pipeline's numpy concatenation path.

Run from the repo root: python3 tools/make_fixtures.py
"""

import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from dashcoach.catalog import default_catalog, expand_for_clip  # noqa: E402
from dashcoach.frames import MergePolicy, merge_clip  # noqa: E402
from dashcoach.gateway import frames_to_payload  # noqa: E402
from dashcoach.manifest import ClipPair  # noqa: E402
from dashcoach.parsing import default_rules, parse_response  # noqa: E402
import stubproto  # noqa: E402

SEED = 42
CLIP_IDS = ["c1", "c2", "c3"]
FRAMES_PER_CAMERA = 4
W, H = 64, 48
DURATION_S = 8.0

OQ_REFERENCES = {
    "c1": {
        "oq_scene": "The ego-car travels along a two-lane road while the driver checks the mirrors and keeps a steady speed.",
        "oq_advice": "Keep the current speed and maintain the following distance through the merge.",
    },
    "c2": {
        "oq_scene": "The vehicle approaches an intersection and slows down smoothly while traffic crosses ahead.",
        "oq_advice": "Slow down earlier and keep extra distance from the truck ahead.",
    },
    "c3": {
        "oq_scene": "The ego-car follows a truck closely and brakes when the traffic slows near the crossing.",
        "oq_advice": "Increase the gap to the truck and brake gently before the crossing.",
    },
}


def synth_frame(rng: np.random.Generator, camera: str, index: int) -> np.ndarray:
    """Gradient background + a moving block so frames differ everywhere."""
    ys = np.linspace(0, 255, H, dtype=np.float64)[:, None]
    xs = np.linspace(0, 255, W, dtype=np.float64)[None, :]
    base = np.zeros((H, W, 3), dtype=np.float64)
    if camera == "road":
        base[..., 0] = xs
        base[..., 1] = ys
        base[..., 2] = 60
    else:
        base[..., 0] = 200 - xs * 0.5
        base[..., 1] = 40
        base[..., 2] = ys
    noise = rng.integers(0, 40, size=(H, W, 3))
    frame = np.clip(base + noise, 0, 255).astype(np.uint8)
    x0 = (index * 13) % (W - 12)
    y0 = (index * 7) % (H - 12)
    frame[y0 : y0 + 10, x0 : x0 + 10] = (255, 255, 255) if camera == "road" else (0, 0, 0)
    return frame


def write_clips(fixture_dir: Path) -> dict[str, dict[str, Path]]:
    rng = np.random.default_rng(SEED)
    dirs: dict[str, dict[str, Path]] = {}
    for cid in CLIP_IDS:
        dirs[cid] = {}
        for camera in ("road", "driver"):
            d = fixture_dir / "clips" / cid / camera
            d.mkdir(parents=True, exist_ok=True)
            for i in range(FRAMES_PER_CAMERA):
                Image.fromarray(synth_frame(rng, camera, i)).save(d / f"frame_{i:03d}.png")
            dirs[cid][camera] = d
    return dirs


def write_manifest(fixture_dir: Path) -> Path:
    doc = {
        "clips": [
            {
                "id": cid,
                "road_video": f"clips/{cid}/road",
                "driver_video": f"clips/{cid}/driver",
                "duration_s": DURATION_S,
                "split": "test",
            }
            for cid in CLIP_IDS
        ]
    }
    path = fixture_dir / "manifest.json"
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return path


def stub_answers(fixture_dir: Path) -> dict[str, dict[str, object]]:
    """What the deterministic stub will answer per clip/template."""
    catalog = default_catalog()
    rules = default_rules()
    policy = MergePolicy(sample_count=FRAMES_PER_CAMERA, width=W, height=H)
    answers: dict[str, dict[str, object]] = {}
    for cid in CLIP_IDS:
        clip = ClipPair(
            id=cid,
            road_video=str(fixture_dir / "clips" / cid / "road"),
            driver_video=str(fixture_dir / "clips" / cid / "driver"),
            duration_s=DURATION_S,
            split="test",
        )
        media = frames_to_payload(merge_clip(clip, policy))
        answers[cid] = {}
        for inst in expand_for_clip(catalog, cid):
            template = catalog.template(inst.template_id)
            raw = stubproto.stub_infer(SEED, media, [{"role": "user", "content": template.text}])
            answers[cid][template.id] = parse_response(raw, template, rules)
    return answers


def write_gold(fixture_dir: Path, answers: dict[str, dict[str, object]]) -> Path:
    catalog = default_catalog()
    er_templates = [t for t in catalog.templates if t.er_countable]
    lines = []
    for j, cid in enumerate(CLIP_IDS):
        er_gold = {}
        for i, template in enumerate(er_templates):
            parsed = answers[cid][template.id]
            want_match = (i + j) % 3 != 0
            if template.kind == "binary":
                if parsed.variant == "affirmative":
                    er_gold[template.id] = "yes" if want_match else "no"
                elif parsed.variant == "negative":
                    er_gold[template.id] = "no" if want_match else "yes"
                else:
                    er_gold[template.id] = "yes"  # unparseable: always a false event
            else:
                labels = [c.label for c in template.choices]
                if parsed.variant == "choice" and want_match:
                    er_gold[template.id] = parsed.label
                elif parsed.variant == "choice":
                    pos = labels.index(parsed.label)
                    er_gold[template.id] = labels[(pos + 1) % len(labels)]
                else:
                    er_gold[template.id] = labels[0]
        lines.append(
            json.dumps({"clip_id": cid, "er_gold": er_gold, "oq_gold": OQ_REFERENCES[cid]})
        )
    path = fixture_dir / "gold.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_composite_golden(fixture_dir: Path, out_path: Path):
    road = Image.open(fixture_dir / "clips" / "c1" / "road" / "frame_000.png")
    driver = Image.open(fixture_dir / "clips" / "c1" / "driver" / "frame_000.png")
    canvas = Image.new("RGB", (road.width + driver.width, road.height))
    canvas.paste(road, (0, 0))
    canvas.paste(driver, (road.width, 0))
    canvas.save(out_path)


def main():
    fixture_dir = ROOT / "tests" / "data" / "fixture"
    fixture_dir.mkdir(parents=True, exist_ok=True)
    write_clips(fixture_dir)
    write_manifest(fixture_dir)
    answers = stub_answers(fixture_dir)
    write_gold(fixture_dir, answers)
    write_composite_golden(fixture_dir, ROOT / "tests" / "data" / "composite_golden.png")
    matched = sum(
        1
        for cid in CLIP_IDS
        for t, a in answers[cid].items()
        if getattr(a, "variant", "") in ("affirmative", "negative", "choice")
    )
    print(f"fixtures written; {matched} parseable stub answers across {len(CLIP_IDS)} clips")


if __name__ == "__main__":
    main()
