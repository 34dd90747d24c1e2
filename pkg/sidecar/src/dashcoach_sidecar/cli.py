"""dashcoach-sidecar: serve the model wire protocol.

    dashcoach-sidecar --port 8900 --seed 42
    dashcoach-sidecar --config sidecar.json --backend stub

Config file (JSON): {"seed": int, "embed_dim": int, "port": int,
"answer_pools": {"binary"|"categorical"|"open": [str, ...]}}. Flags
override config values.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .backend import load_backend
from .server import SidecarServer
from .stub import StubConfig


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dashcoach-sidecar", description=__doc__)
    parser.add_argument("--port", type=int, help="listen port (default 8900)")
    parser.add_argument("--host", default="127.0.0.1", help="bind address")
    parser.add_argument("--seed", type=int, help="stub seed (default 42)")
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument(
        "--backend",
        default="stub",
        help='"stub" (default) or "module:factory" for a real-model adapter',
    )
    parser.add_argument("--verbose", action="store_true", help="log requests")
    return parser


def build_config(args: argparse.Namespace) -> tuple[StubConfig, int]:
    file_values: dict = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ValueError(f"config file not found: {path}")
        file_values = json.loads(path.read_text(encoding="utf-8"))
    config = StubConfig()
    if "seed" in file_values:
        config.seed = int(file_values["seed"])
    if "embed_dim" in file_values:
        config.embed_dim = int(file_values["embed_dim"])
    if "answer_pools" in file_values:
        config.answer_pools.update(
            {k: list(v) for k, v in file_values["answer_pools"].items()}
        )
    if args.seed is not None:
        config.seed = args.seed
    port = args.port if args.port is not None else int(file_values.get("port", 8900))
    config.validate()
    return config, port


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        config, port = build_config(args)
        backend = load_backend(args.backend, config)
        server = SidecarServer(backend, host=args.host, port=port, verbose=args.verbose)
    except OSError as e:
        print(f"error: cannot bind {args.host}:{args.port}: {e}", file=sys.stderr)
        return 1
    except (ValueError, TypeError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"dashcoach-sidecar listening on {server.url} (backend {args.backend})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


if __name__ == "__main__":
    sys.exit(main())
