#!/usr/bin/env python3
"""Freeze the end-to-end evaluation golden.

Runs `dashcoach evaluate` over the 3-clip fixture against the in-process
stub endpoint (seed 42, fixed port, pinned timestamp) and copies the
resulting report.json to tests/data/eval_report_golden.json.

Run from the repo root: python3 tools/make_goldens.py
"""

import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from dashcoach.cli import main as cli_main  # noqa: E402
from stubproto import StubServer  # noqa: E402

SEED = 42
PORT = 18907
TIMESTAMP = "2026-01-01T00:00:00Z"


def golden_eval_args(out_dir: str, url: str) -> list[str]:
    fixture = ROOT / "tests" / "data" / "fixture"
    return [
        "evaluate",
        "--manifest", str(fixture / "manifest.json"),
        "--gold", str(fixture / "gold.jsonl"),
        "--endpoint", f"stub={url}",
        "--out", out_dir,
        "--seed", str(SEED),
        "--frames", "4",
        "--frame-width", "64",
        "--frame-height", "48",
        "--timestamp", TIMESTAMP,
        "--no-figures",
    ]


def main():
    out_dir = tempfile.mkdtemp(prefix="dashcoach_golden_")
    with StubServer(seed=SEED, port=PORT) as server:
        code = cli_main(golden_eval_args(out_dir, server.url))
    if code != 0:
        raise SystemExit(f"evaluate exited {code}")
    src = Path(out_dir) / "report.json"
    dst = ROOT / "tests" / "data" / "eval_report_golden.json"
    shutil.copyfile(src, dst)
    print(f"wrote {dst} ({dst.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
