"""HTTP client for multimodal inference and embedding endpoints.

Wire protocol (UTF-8 JSON over HTTP):

* POST /infer  {"media": {"frames": [b64...]} | {"video_path": str},
                "audio": str?, "turns": [{"role", "content"}],
                "params": {"temperature", "max_tokens", "seed"}}
               -> {"text": str}
* POST /embed  {"texts": [str, ...]}
               -> {"embeddings": [{"tokens": [...], "vectors": [[...]]}], "dim": int}

Errors surface as typed exceptions; the dialogue runner converts per-turn
failures into unparseable transcript entries instead of aborting a run.
"""

from __future__ import annotations

import base64
import io
import time
from dataclasses import dataclass, field

import requests

from .catalog import CONDITIONAL, Catalog, InstructionInstance
from .errors import (
    EndpointTimeout,
    GatewayError,
    HttpStatusError,
    ProtocolError,
    TransportError,
)
from .frames import MergedFrameSet
from .metrics.bertscore import EmbeddingMatrix
from .parsing import AFFIRMATIVE, NormalizationRuleSet, ParsedAnswer, parse_response


@dataclass(frozen=True)
class ChatTurn:
    role: str  # "user" | "assistant"
    content: str


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 0.0
    max_tokens: int = 256
    seed: int = 0


@dataclass(frozen=True)
class RetryPolicy:
    attempts: int = 3
    backoff_s: float = 0.25
    timeout_s: float = 30.0


@dataclass(frozen=True)
class InferenceRequest:
    media: dict  # {"frames": [...]} or {"video_path": str}
    turns: list[ChatTurn]
    params: GenerationParams
    audio: str | None = None

    def validate(self, expected_frames: int | None = None):
        if not any(t.role == "user" for t in self.turns):
            raise ValueError("request needs at least one user turn")
        if self.params.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.params.temperature}")
        if self.params.max_tokens <= 0:
            raise ValueError(f"max_tokens must be > 0, got {self.params.max_tokens}")
        if "frames" in self.media:
            n = len(self.media["frames"])
            if expected_frames is not None and n != expected_frames:
                raise ValueError(f"request carries {n} frames, policy expects {expected_frames}")
        elif "video_path" not in self.media:
            raise ValueError('media must carry "frames" or "video_path"')

    def to_wire(self) -> dict:
        doc: dict = {
            "media": self.media,
            "turns": [{"role": t.role, "content": t.content} for t in self.turns],
            "params": {
                "temperature": self.params.temperature,
                "max_tokens": self.params.max_tokens,
                "seed": self.params.seed,
            },
        }
        if self.audio is not None:
            doc["audio"] = self.audio
        return doc


@dataclass
class TranscriptEntry:
    instance: InstructionInstance
    raw_response: str
    parsed: ParsedAnswer
    latency_ms: float
    error: str | None = None


@dataclass
class DialogueTranscript:
    clip_id: str
    entries: list[TranscriptEntry] = field(default_factory=list)

    def entry_for(self, template_id: str) -> TranscriptEntry | None:
        for e in self.entries:
            if e.instance.template_id == template_id:
                return e
        return None


def frames_to_payload(merged: MergedFrameSet) -> dict:
    """Encode composite frames as inline base64 PNG payloads."""
    from PIL import Image

    frames = []
    for frame in merged.frames:
        buf = io.BytesIO()
        Image.fromarray(frame).save(buf, format="PNG")
        frames.append(base64.b64encode(buf.getvalue()).decode("ascii"))
    return {"frames": frames}


class HttpTransport:
    """requests-based transport; one call per request, safe across threads."""

    def post(self, url: str, payload: dict, timeout_s: float) -> dict:
        try:
            resp = requests.post(url, json=payload, timeout=timeout_s)
        except requests.Timeout as e:
            raise EndpointTimeout(f"timeout after {timeout_s}s talking to {url}") from e
        except requests.RequestException as e:
            raise TransportError(f"transport error talking to {url}: {e}") from e
        if not 200 <= resp.status_code < 300:
            detail = ""
            try:
                detail = resp.json().get("error", "")
            except Exception:
                pass
            raise HttpStatusError(
                f"{url} answered {resp.status_code}: {detail or resp.text[:200]}",
                status=resp.status_code,
            )
        try:
            body = resp.json()
        except ValueError as e:
            raise ProtocolError(f"{url} answered non-JSON body") from e
        if not isinstance(body, dict):
            raise ProtocolError(f"{url} answered a non-object JSON body")
        return body


class InferenceClient:
    """Client for one endpoint; retries timeouts/transport errors with
    exponential backoff, never retries 4xx."""

    def __init__(self, endpoint: str, retry: RetryPolicy = RetryPolicy(), transport=None):
        self.endpoint = endpoint.rstrip("/")
        self.retry = retry
        self.transport = transport or HttpTransport()

    def _post_with_retry(self, path: str, payload: dict) -> dict:
        url = f"{self.endpoint}{path}"
        last: GatewayError | None = None
        for attempt in range(self.retry.attempts):
            try:
                return self.transport.post(url, payload, self.retry.timeout_s)
            except (EndpointTimeout, TransportError) as e:
                last = e
            except HttpStatusError as e:
                if e.status >= 500:
                    last = e
                else:
                    raise
            if attempt + 1 < self.retry.attempts:
                time.sleep(self.retry.backoff_s * (2**attempt))
        assert last is not None
        raise last

    def infer(self, request: InferenceRequest, expected_frames: int | None = None) -> str:
        request.validate(expected_frames)
        body = self._post_with_retry("/infer", request.to_wire())
        text = body.get("text")
        if not isinstance(text, str):
            raise ProtocolError(f'{self.endpoint}/infer body lacks a string "text" field')
        return text

    def embed(self, texts: list[str]) -> list[EmbeddingMatrix]:
        if not texts or any(not t for t in texts):
            raise ValueError("embed needs at least one non-empty text")
        body = self._post_with_retry("/embed", {"texts": list(texts)})
        embeddings = body.get("embeddings")
        dim = body.get("dim")
        if not isinstance(embeddings, list) or len(embeddings) != len(texts):
            raise ProtocolError(
                f"{self.endpoint}/embed returned {len(embeddings) if isinstance(embeddings, list) else 'no'} "
                f"embeddings for {len(texts)} texts"
            )
        out = []
        for i, entry in enumerate(embeddings):
            try:
                matrix = EmbeddingMatrix(tokens=list(entry["tokens"]), vectors=entry["vectors"])
            except Exception as e:
                raise ProtocolError(f"embedding #{i} malformed: {e}") from e
            if matrix.dim != dim:
                raise ProtocolError(f"embedding #{i} has dim {matrix.dim}, batch declares {dim}")
            out.append(matrix)
        return out

    def healthy(self) -> bool:
        try:
            resp = requests.get(f"{self.endpoint}/healthz", timeout=self.retry.timeout_s)
            return resp.status_code == 200
        except requests.RequestException:
            return False


def run_dialogue(
    client: InferenceClient,
    media: dict,
    instances: list[InstructionInstance],
    catalog: Catalog,
    rules: NormalizationRuleSet,
    params: GenerationParams,
    mode: str,
    audio: str | None = None,
    include_history: bool = True,
    expected_frames: int | None = None,
) -> DialogueTranscript:
    """Issue each instruction as one user turn in a running dialogue.

    Conditional follow-ups are asked only when the parent entry parsed
    Affirmative. Per-turn endpoint failures become unparseable entries and
    the dialogue continues; in exhaustive mode every instance yields an
    entry no matter what.
    """
    clip_id = instances[0].clip_id if instances else ""
    transcript = DialogueTranscript(clip_id=clip_id)
    history: list[ChatTurn] = []
    answered: dict[int, ParsedAnswer] = {}  # turn_index -> parsed

    for inst in instances:
        if inst.conditional and mode == CONDITIONAL:
            parent = answered.get(inst.parent_instance)
            if parent is None or parent.variant != AFFIRMATIVE:
                continue
        template = catalog.template(inst.template_id)
        turns = (history if include_history else []) + [ChatTurn("user", template.text)]
        request = InferenceRequest(media=media, turns=turns, params=params, audio=audio)
        start = time.monotonic()
        try:
            raw = client.infer(request, expected_frames=expected_frames)
        except GatewayError as e:
            latency = (time.monotonic() - start) * 1000.0
            parsed = ParsedAnswer.unparseable(f"<{type(e).__name__}>")
            transcript.entries.append(
                TranscriptEntry(
                    instance=inst,
                    raw_response="",
                    parsed=parsed,
                    latency_ms=latency,
                    error=f"{type(e).__name__}: {e}",
                )
            )
            answered[inst.turn_index] = parsed
            continue
        latency = (time.monotonic() - start) * 1000.0
        parsed = parse_response(raw, template, rules)
        transcript.entries.append(
            TranscriptEntry(instance=inst, raw_response=raw, parsed=parsed, latency_ms=latency)
        )
        answered[inst.turn_index] = parsed
        history.append(ChatTurn("user", template.text))
        history.append(ChatTurn("assistant", raw))

    return transcript
