"""Model sidecar: HTTP /infer + /embed with a deterministic stub backend."""

__version__ = "0.1.0"
