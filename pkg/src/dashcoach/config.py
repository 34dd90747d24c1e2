"""Flat TOML-style key/value config files mirroring the CLI flags.

Example:

    manifest = "fixtures/manifest.json"
    endpoint = "stub=http://127.0.0.1:8900"
    seed = 42
    frames = 4
    figures = false

Values: quoted or bare strings, integers, floats, true/false. Flags given
on the command line override file values.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ConfigError
from .frames import MergePolicy
from .gateway import RetryPolicy
from .harness import EndpointSpec, RunConfig


def parse_config_text(text: str) -> dict:
    values: dict = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value, got {raw_line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"config line {lineno}: empty key")
        if value.startswith('"') and value.endswith('"') and len(value) >= 2:
            values[key] = value[1:-1]
            continue
        low = value.lower()
        if low in ("true", "false"):
            values[key] = low == "true"
            continue
        try:
            values[key] = int(value)
            continue
        except ValueError:
            pass
        try:
            values[key] = float(value)
            continue
        except ValueError:
            pass
        values[key] = value
    return values


def load_config_file(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"))


def parse_endpoint_arg(arg: str) -> EndpointSpec:
    """NAME=URL; a bare URL gets the name "model"."""
    if "=" in arg and not arg.startswith(("http://", "https://")):
        name, _, url = arg.partition("=")
        name = name.strip()
        url = url.strip()
        if not name or not url:
            raise ConfigError(f"endpoint must be NAME=URL, got {arg!r}")
        return EndpointSpec(name=name, url=url)
    return EndpointSpec(name="model", url=arg.strip())


def load_policy_file(path: str | Path) -> MergePolicy:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"policy file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"policy file parse error: {e.msg}") from e
    try:
        return MergePolicy(
            sample_count=int(doc.get("sample_count", 8)),
            width=int(doc.get("width", 640)),
            height=int(doc.get("height", 480)),
            layout=doc.get("layout", "road_left"),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e


def build_run_config(file_values: dict, flag_values: dict) -> RunConfig:
    """Merge config-file values with CLI flags (flags win) into a RunConfig."""
    merged = dict(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})

    def get(key, default=None):
        return merged.get(key, default)

    manifest = get("manifest")
    if not manifest:
        raise ConfigError("a manifest is required (flag --manifest or config key manifest)")

    endpoints: list[EndpointSpec] = []
    raw_endpoints = get("endpoint")
    if raw_endpoints:
        if isinstance(raw_endpoints, str):
            raw_endpoints = [e.strip() for e in raw_endpoints.split(",") if e.strip()]
        endpoints = [parse_endpoint_arg(e) for e in raw_endpoints]

    if get("policy"):
        policy = load_policy_file(get("policy"))
    else:
        policy = MergePolicy()
    try:
        policy = MergePolicy(
            sample_count=int(get("frames", policy.sample_count)),
            width=int(get("frame_width", policy.width)),
            height=int(get("frame_height", policy.height)),
            layout=get("layout", policy.layout),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e

    retry = RetryPolicy(
        attempts=int(get("retry_attempts", 3)),
        backoff_s=float(get("retry_backoff_s", 0.25)),
        timeout_s=float(get("timeout_s", 30.0)),
    )

    unparseable_policy = get("unparseable_policy", "false_event")
    if unparseable_policy not in ("false_event", "exclude"):
        raise ConfigError(
            f"unparseable_policy must be false_event or exclude, got {unparseable_policy!r}"
        )

    return RunConfig(
        manifest_path=str(manifest),
        endpoints=endpoints,
        catalog_path=get("catalog"),
        gold_path=get("gold"),
        db_path=get("db"),
        rules_path=get("rules"),
        out_dir=str(get("out", "out")),
        cache_dir=get("cache"),
        seed=int(get("seed", 42)),
        policy=policy,
        retry=retry,
        in_flight=int(get("in_flight", 4)),
        include_history=bool(get("include_history", True)),
        max_tokens=int(get("max_tokens", 256)),
        temperature=float(get("temperature", 0.0)),
        timestamp=get("timestamp"),
        figures=bool(get("figures", True)),
        embed_url=get("embed_endpoint"),
        unparseable_policy=unparseable_policy,
    )
