"""Backend interface and loading.

A backend answers /infer and /embed. The stub ships in-tree; a real
video-LLM / embedding adapter plugs in as "module.path:factory" where the
factory returns an object with the same two methods. The service never
cares which one is answering.
"""

from __future__ import annotations

import importlib
from typing import Protocol, runtime_checkable

from .stub import StubBackend, StubConfig


@runtime_checkable
class Backend(Protocol):
    def infer(self, media: dict, turns: list[dict], params: dict) -> str: ...

    def embed(self, texts: list[str]) -> dict: ...


def load_backend(spec: str | None, config: StubConfig) -> Backend:
    """spec None/"stub" -> deterministic stub; otherwise "module:factory"."""
    if spec in (None, "stub"):
        return StubBackend(config)
    module_name, _, factory_name = spec.partition(":")
    if not factory_name:
        raise ValueError(f"backend spec must be 'module:factory', got {spec!r}")
    module = importlib.import_module(module_name)
    factory = getattr(module, factory_name)
    backend = factory(config)
    if not isinstance(backend, Backend):
        raise TypeError(f"{spec!r} did not produce an infer/embed backend")
    return backend
