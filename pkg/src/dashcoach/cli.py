"""dashcoach command line.

Subcommands: ingest (populate the merged-frame cache), evaluate (score
endpoints over the test split and emit reports), coach (conditional
dialogue + coaching report for one clip), export-catalog (print the
built-in instruction catalog). Exit codes: 0 success, 1 fatal
config/data error, 2 completed with per-item failures.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from pathlib import Path

from . import harness
from .catalog import default_catalog_text
from .config import build_run_config, load_config_file
from .errors import DashcoachError
from .report import build_report, write_report_files

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="key = value config file; flags override it")
    parser.add_argument("--manifest", help="dataset manifest (JSON)")
    parser.add_argument("--catalog", help="instruction catalog (JSON); defaults to the built-in")
    parser.add_argument("--rules", help="normalization rule file; defaults to the built-in")
    parser.add_argument("--cache", help="merged-frame cache directory")
    parser.add_argument("--seed", type=int, help="generation seed (default 42)")
    parser.add_argument("--frames", type=int, help="frames sampled per clip (default 8)")
    parser.add_argument("--frame-width", type=int, dest="frame_width", help="per-camera width")
    parser.add_argument("--frame-height", type=int, dest="frame_height", help="per-camera height")
    parser.add_argument("--layout", choices=["road_left", "road_right"], help="composite layout")
    parser.add_argument("--policy", help="merge policy JSON file")
    parser.add_argument("--timeout", type=float, dest="timeout_s", help="per-request timeout (s)")
    parser.add_argument("--retries", type=int, dest="retry_attempts", help="retry attempts")


def _flag_values(args: argparse.Namespace) -> dict:
    skip = {"command", "config", "clip", "func", "no_figures", "no_history"}
    values = {k: v for k, v in vars(args).items() if k not in skip}
    if getattr(args, "no_figures", False):
        values["figures"] = False
    if getattr(args, "no_history", False):
        values["include_history"] = False
    return values


def _run_config(args: argparse.Namespace) -> harness.RunConfig:
    file_values = load_config_file(args.config) if args.config else {}
    return build_run_config(file_values, _flag_values(args))


def cmd_ingest(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    summary = harness.ingest(cfg)
    for cid in summary.cache_hits:
        print(f"cached    {cid}")
    for cid in summary.processed:
        print(f"extracted {cid}")
    for cid, reason in sorted(summary.failures.items()):
        print(f"FAILED    {cid}: {reason}", file=sys.stderr)
    print(
        f"{len(summary.processed)} extracted, {len(summary.cache_hits)} cache hits, "
        f"{len(summary.failures)} failures"
    )
    return EXIT_PARTIAL if summary.failures else EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    outcome = harness.evaluate(cfg)
    timestamp = cfg.timestamp or _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    metadata = {
        "endpoints": [{"model": e.name, "url": e.url} for e in sorted(cfg.endpoints, key=lambda e: e.name)],
        "seed": cfg.seed,
        "generated_at": timestamp,
        "policy": {
            "sample_count": cfg.policy.sample_count,
            "width": cfg.policy.width,
            "height": cfg.policy.height,
            "layout": cfg.policy.layout,
        },
    }
    report = build_report(outcome, metadata)
    paths = write_report_files(report, cfg.out_dir, figures=cfg.figures)
    print((Path(cfg.out_dir) / "summary.txt").read_text(), end="")
    for name in ("report", "per_item", "summary"):
        print(f"wrote {paths[name]}")
    if outcome.per_item_failures:
        print(f"{outcome.per_item_failures} turns failed and were scored unparseable", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_coach(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    report = harness.coach(cfg, args.clip, llm_url=args.llm_endpoint)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = out / f"coach_{report.clip_id}"
    base.with_suffix(".json").write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (out / f"coach_{report.clip_id}_driver.txt").write_text(report.driver_text, encoding="utf-8")
    (out / f"coach_{report.clip_id}_manager.txt").write_text(report.manager_text, encoding="utf-8")
    print(report.driver_text, end="")
    print(f"wrote {base.with_suffix('.json')}")
    return EXIT_OK


def cmd_export_catalog(args: argparse.Namespace) -> int:
    text = default_catalog_text()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dashcoach", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="extract, resize, and merge frames into the cache")
    _add_common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("evaluate", help="run the instruction evaluation against endpoints")
    _add_common(p)
    p.add_argument(
        "--endpoint",
        action="append",
        help="model endpoint as NAME=URL (repeatable)",
    )
    p.add_argument("--gold", help="gold record file (JSON lines)")
    p.add_argument("--out", help="output directory (default out)")
    p.add_argument("--embed-endpoint", dest="embed_endpoint", help="embedding endpoint URL")
    p.add_argument("--timestamp", help="pin the report generated_at value")
    p.add_argument("--in-flight", type=int, dest="in_flight", help="concurrent dialogues (default 4)")
    p.add_argument("--max-tokens", type=int, dest="max_tokens", help="generation budget per turn")
    p.add_argument("--temperature", type=float, help="sampling temperature (default 0)")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.add_argument("--no-history", action="store_true", help="ask questions without dialogue context")
    p.add_argument(
        "--unparseable-policy",
        dest="unparseable_policy",
        choices=["false_event", "exclude"],
        help="score unparseable answers as misses (default) or drop them from AR",
    )
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("coach", help="generate a coaching report for one clip")
    _add_common(p)
    p.add_argument("--clip", required=True, help="clip id from the manifest")
    p.add_argument("--db", help="coaching database (JSON); defaults to the built-in")
    p.add_argument("--endpoint", action="append", help="model endpoint as NAME=URL or URL")
    p.add_argument("--llm-endpoint", dest="llm_endpoint", help="optional composer LLM endpoint")
    p.add_argument("--out", help="output directory (default out)")
    p.set_defaults(func=cmd_coach)

    p = sub.add_parser("export-catalog", help="print the built-in instruction catalog")
    p.add_argument("--out", help="write to a file instead of stdout")
    p.set_defaults(func=cmd_export_catalog)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except DashcoachError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
