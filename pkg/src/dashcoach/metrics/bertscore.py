"""BERTScore greedy matching over externally supplied token embeddings.

Recall: each reference token takes its best cosine match among hypothesis
tokens, averaged; precision is the mirror image; F1 the harmonic mean.
No idf weighting, no baseline rescaling — the metric core is agnostic to
which embedding model produced the matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import MetricError


@dataclass
class EmbeddingMatrix:
    """Per-token embedding rows for one text."""

    tokens: list[str]
    vectors: np.ndarray  # shape (len(tokens), d)
    unit_norm: bool = False

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2:
            raise MetricError(f"embedding matrix must be 2-D, got shape {self.vectors.shape}")
        if len(self.tokens) != self.vectors.shape[0]:
            raise MetricError(
                f"{len(self.tokens)} tokens but {self.vectors.shape[0]} vector rows"
            )
        if self.unit_norm:
            norms = np.linalg.norm(self.vectors, axis=1)
            if not np.allclose(norms, 1.0, atol=1e-6):
                raise MetricError("unit_norm set but rows are not L2-normalized")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class BertScoreResult:
    precision: float
    recall: float
    f1: float


def _normalized(m: EmbeddingMatrix) -> np.ndarray:
    if m.unit_norm:
        return m.vectors
    norms = np.linalg.norm(m.vectors, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise MetricError("zero-norm embedding row; cosine similarity undefined")
    return m.vectors / norms


def bert_score(hyp: EmbeddingMatrix, ref: EmbeddingMatrix) -> BertScoreResult:
    if len(hyp) == 0 or len(ref) == 0:
        raise MetricError("BERTScore is undefined for empty embedding matrices")
    if hyp.dim != ref.dim:
        raise MetricError(f"embedding dimension mismatch: {hyp.dim} vs {ref.dim}")
    sims = _normalized(hyp) @ _normalized(ref).T  # (|hyp|, |ref|) cosines
    precision = float(sims.max(axis=1).mean())
    recall = float(sims.max(axis=0).mean())
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
    return BertScoreResult(precision=precision, recall=recall, f1=f1)


def corpus_bert_score(pairs: Sequence[tuple[EmbeddingMatrix, EmbeddingMatrix]]) -> BertScoreResult:
    """Unweighted mean of per-pair scores (F1 averaged per pair, not
    recomputed from the averaged precision/recall)."""
    if not pairs:
        raise MetricError("BERTScore is undefined on an empty corpus")
    scores = [bert_score(h, r) for h, r in pairs]
    return BertScoreResult(
        precision=float(np.mean([s.precision for s in scores])),
        recall=float(np.mean([s.recall for s in scores])),
        f1=float(np.mean([s.f1 for s in scores])),
    )
