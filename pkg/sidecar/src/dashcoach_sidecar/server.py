"""HTTP service speaking the dashcoach wire protocol.

POST /infer   {"media": {...}, "audio"?: str, "turns": [...], "params": {...}}
              -> {"text": str}
POST /embed   {"texts": [str, ...]}
              -> {"embeddings": [{"tokens", "vectors"}], "dim": int}
GET  /healthz -> 200 {"status": "ok"}

Errors are non-2xx with {"error": str}. Request handling is stateless;
determinism is per-request and independent of interleaving.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .backend import Backend


def _validate_infer(body: dict) -> str | None:
    media = body.get("media")
    if not isinstance(media, dict) or ("frames" not in media and "video_path" not in media):
        return 'media must carry "frames" or "video_path"'
    if "frames" in media and not isinstance(media["frames"], list):
        return "media.frames must be a list"
    turns = body.get("turns")
    if not isinstance(turns, list) or not turns:
        return "turns must be a non-empty list"
    for t in turns:
        if not isinstance(t, dict) or t.get("role") not in ("user", "assistant") or not isinstance(
            t.get("content"), str
        ):
            return "each turn needs a user/assistant role and string content"
    if not any(t["role"] == "user" for t in turns):
        return "at least one user turn is required"
    return None


class _Handler(BaseHTTPRequestHandler):
    server_version = "dashcoach-sidecar/0.1"

    def log_message(self, fmt, *args):
        if getattr(self.server, "verbose", False):  # type: ignore[attr-defined]
            super().log_message(fmt, *args)

    def _send(self, status: int, body: dict):
        data = json.dumps(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def do_GET(self):
        if self.path == "/healthz":
            self._send(200, {"status": "ok"})
        else:
            self._send(404, {"error": f"unknown path {self.path}"})

    def do_POST(self):
        backend: Backend = self.server.backend  # type: ignore[attr-defined]
        try:
            length = int(self.headers.get("Content-Length", 0))
            body = json.loads(self.rfile.read(length))
            if not isinstance(body, dict):
                raise ValueError
        except (ValueError, json.JSONDecodeError):
            self._send(400, {"error": "request body is not a JSON object"})
            return

        if self.path == "/infer":
            problem = _validate_infer(body)
            if problem:
                self._send(400, {"error": problem})
                return
            try:
                text = backend.infer(body["media"], body["turns"], body.get("params") or {})
            except Exception as e:  # backend crash becomes a 500, not a dead socket
                self._send(500, {"error": f"backend failure: {e}"})
                return
            self._send(200, {"text": text})
        elif self.path == "/embed":
            texts = body.get("texts")
            if not isinstance(texts, list) or not texts or not all(isinstance(t, str) for t in texts):
                self._send(400, {"error": "texts must be a non-empty list of strings"})
                return
            try:
                self._send(200, backend.embed(texts))
            except Exception as e:
                self._send(500, {"error": f"backend failure: {e}"})
        else:
            self._send(404, {"error": f"unknown path {self.path}"})


class SidecarServer:
    """Bind + serve; usable as a context manager in tests."""

    def __init__(self, backend: Backend, host: str = "127.0.0.1", port: int = 8900, verbose: bool = False):
        self._httpd = ThreadingHTTPServer((host, port), _Handler)
        self._httpd.backend = backend  # type: ignore[attr-defined]
        self._httpd.verbose = verbose  # type: ignore[attr-defined]
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start_background(self) -> "SidecarServer":
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def serve_forever(self):
        self._httpd.serve_forever()

    def shutdown(self):
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self) -> "SidecarServer":
        return self.start_background()

    def __exit__(self, *exc):
        self.shutdown()
        return False
