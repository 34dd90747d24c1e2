"""Deterministic stub backend.

Responses are input-sensitive but fully reproducible: the answer is drawn
from a per-kind pool by a stable hash of (seed, last user turn, media
digest). Categorical questions get one of their own option labels
interpolated. Embeddings hash each whitespace token into fixed-width
float blocks and L2-normalize.

The evaluation harness ships an in-process mock with this exact contract;
any change here must keep the cross-implementation integration golden
green (tests/test_integration.py).
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field

DEFAULT_EMBED_DIM = 64

DEFAULT_POOLS: dict[str, list[str]] = {
    "binary": [
        "Yes.",
        "No.",
        "Yes, it is clearly visible in the footage.",
        "No, nothing like that happens in the video.",
        "Sure! Yes, that event does occur.",
        "There is no sign of that in the video.",
        "It is hard to tell from the footage.",
    ],
    "categorical": [
        "The answer is {choice}.",
        "It looks {choice} to me.",
        "Hello! Based on the footage, the condition appears to be {choice}.",
        "{choice}.",
    ],
    "open": [
        "The ego-car travels along a two-lane road while the driver checks the mirrors and keeps a steady speed.",
        "As an AI assistant, I can describe the scene: the vehicle approaches an intersection and slows down smoothly.",
        "The driver maintains a safe following distance while traffic merges from the right lane.",
        "The ego-car follows a truck closely and brakes when the traffic slows near the crossing.",
    ],
}

BINARY_FIRST_WORDS = {
    "did", "does", "do", "is", "are", "can", "could", "was", "were",
    "will", "would", "has", "have", "why", "how",
}


@dataclass
class StubConfig:
    seed: int = 42
    embed_dim: int = DEFAULT_EMBED_DIM
    answer_pools: dict[str, list[str]] = field(default_factory=lambda: {
        k: list(v) for k, v in DEFAULT_POOLS.items()
    })

    def validate(self):
        if self.embed_dim < 1:
            raise ValueError(f"embed_dim must be positive, got {self.embed_dim}")
        for kind in ("binary", "categorical", "open"):
            if not self.answer_pools.get(kind):
                raise ValueError(f"answer pool for {kind!r} must be non-empty")


def media_digest(media: dict) -> str:
    if "frames" in media:
        payload = ",".join(media["frames"])
    else:
        payload = str(media.get("video_path", ""))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def parse_options(question: str) -> list[str]:
    """Recover option labels from a categorical question's phrasing."""
    q = question.strip().rstrip("?").strip()
    if "Choose from below" in q:
        tail = q.split("Choose from below", 1)[1]
        return [p.strip() for p in tail.split(",") if p.strip()]
    if " or " in q and "," in q:
        left, right = q.rsplit(" or ", 1)
        pieces = left.split(",")
        head = pieces[0].strip().split()
        options = ([head[-1]] if head else []) + [p.strip() for p in pieces[1:]] + [right.strip()]
        return [o for o in options if o]
    return []


def route_kind(question: str) -> str:
    if parse_options(question):
        return "categorical"
    words = re.findall(r"[a-z']+", question.lower())
    if words and words[0] in BINARY_FIRST_WORDS:
        return "binary"
    return "open"


def _index(seed: int, last_user: str, digest: str, size: int, salt: str = "") -> int:
    key = f"{seed}|{last_user}|{digest}{salt}"
    return int(hashlib.sha256(key.encode("utf-8")).hexdigest(), 16) % size


class StubBackend:
    """Backend implementing the deterministic contract above."""

    def __init__(self, config: StubConfig | None = None):
        self.config = config or StubConfig()
        self.config.validate()

    def infer(self, media: dict, turns: list[dict], params: dict) -> str:
        seed = int(params.get("seed", self.config.seed))
        users = [t for t in turns if t.get("role") == "user"]
        last_user = users[-1]["content"]
        digest = media_digest(media)
        kind = route_kind(last_user)
        pools = self.config.answer_pools
        if kind == "categorical":
            options = parse_options(last_user)
            template = pools["categorical"][
                _index(seed, last_user, digest, len(pools["categorical"]))
            ]
            choice = options[_index(seed, last_user, digest, len(options), salt="|choice")]
            return template.format(choice=choice)
        pool = pools[kind]
        return pool[_index(seed, last_user, digest, len(pool))]

    def embed(self, texts: list[str]) -> dict:
        dim = self.config.embed_dim
        seed = self.config.seed
        embeddings = []
        for text in texts:
            tokens = text.split() or [""]
            embeddings.append(
                {"tokens": tokens, "vectors": [embed_token(seed, t, dim) for t in tokens]}
            )
        return {"embeddings": embeddings, "dim": dim}


def embed_token(seed: int, token: str, dim: int = DEFAULT_EMBED_DIM) -> list[float]:
    values: list[float] = []
    block = 0
    while len(values) < dim:
        h = hashlib.sha256(f"{seed}|{token}|{block}".encode("utf-8")).digest()
        for i in range(0, len(h), 4):
            u = int.from_bytes(h[i : i + 4], "big")
            values.append(u / 2**32 - 0.5)
        block += 1
    values = values[:dim]
    norm = math.sqrt(sum(v * v for v in values))
    return [v / norm for v in values]
