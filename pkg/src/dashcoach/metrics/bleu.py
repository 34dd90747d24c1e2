"""Corpus BLEU matching the reference scorer's defaults.

Pinned configuration: 13a tokenization (WMT mteval-v13a-equivalent
punctuation splitting), case-sensitive, n-grams up to 4, corpus-level
clipped counts, exponential smoothing of zero counts (the k-th zero
precision becomes 1 / (2^k * total)), brevity penalty
min(1, exp(1 - ref_len / hyp_len)). Scores are on the 0-100 scale.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from ..errors import MetricError

NGRAM_ORDER = 4

# log floor so that an all-zero precision drives the geometric mean to 0
_LOG_ZERO = -9999999999


@dataclass(frozen=True)
class BleuResult:
    score: float
    precisions: tuple[float, float, float, float]  # percent, n = 1..4
    brevity_penalty: float
    hyp_len: int
    ref_len: int

    def format(self, width: int = 2) -> str:
        ps = "/".join(f"{p:.1f}" for p in self.precisions)
        ratio = self.hyp_len / self.ref_len if self.ref_len else 0.0
        return (
            f"BLEU = {self.score:.{width}f} {ps} "
            f"(BP = {self.brevity_penalty:.3f} ratio = {ratio:.3f} "
            f"hyp_len = {self.hyp_len:d} ref_len = {self.ref_len:d})"
        )


def tokenize_13a(line: str) -> str:
    """Minimal WMT tokenization, equivalent to mteval-v13a."""
    norm = line
    norm = norm.replace("<skipped>", "")
    norm = norm.replace("-\n", "")
    norm = norm.replace("\n", " ")
    norm = norm.replace("&quot;", '"')
    norm = norm.replace("&amp;", "&")
    norm = norm.replace("&lt;", "<")
    norm = norm.replace("&gt;", ">")

    norm = f" {norm} "
    norm = re.sub(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])", r" \1 ", norm)
    norm = re.sub(r"([^0-9])([\.,])", r"\1 \2 ", norm)
    norm = re.sub(r"([\.,])([^0-9])", r" \1 \2", norm)
    norm = re.sub(r"([0-9])(-)", r"\1 \2 ", norm)
    norm = re.sub(r"\s+", " ", norm)
    return norm.strip()


def _ngrams(tokens: list[str]) -> Counter:
    counts: Counter = Counter()
    for n in range(1, NGRAM_ORDER + 1):
        for i in range(len(tokens) - n + 1):
            counts[tuple(tokens[i : i + n])] += 1
    return counts


def _log(x: float) -> float:
    return math.log(x) if x > 0.0 else _LOG_ZERO


def corpus_bleu(hypotheses: Sequence[str], references: Sequence[str]) -> BleuResult:
    """Corpus-level BLEU of hypotheses against one reference each."""
    if len(hypotheses) != len(references):
        raise MetricError(
            f"hypothesis/reference count mismatch: {len(hypotheses)} vs {len(references)}"
        )
    if not hypotheses:
        raise MetricError("BLEU is undefined on an empty corpus")

    correct = [0] * NGRAM_ORDER
    total = [0] * NGRAM_ORDER
    hyp_len = 0
    ref_len = 0

    for hyp, ref in zip(hypotheses, references):
        hyp_tokens = tokenize_13a(hyp.rstrip()).split()
        ref_tokens = tokenize_13a(ref.rstrip()).split()
        hyp_len += len(hyp_tokens)
        ref_len += len(ref_tokens)
        ref_counts = _ngrams(ref_tokens)
        for ngram, count in _ngrams(hyp_tokens).items():
            n = len(ngram)
            correct[n - 1] += min(count, ref_counts.get(ngram, 0))
            total[n - 1] += count

    precisions = [0.0] * NGRAM_ORDER
    smooth = 1.0
    for n in range(1, NGRAM_ORDER + 1):
        if total[n - 1] == 0:
            break
        if correct[n - 1] == 0:
            smooth *= 2.0
            precisions[n - 1] = 100.0 / (smooth * total[n - 1])
        else:
            precisions[n - 1] = 100.0 * correct[n - 1] / total[n - 1]

    if hyp_len == 0:
        brevity_penalty = 0.0
    elif hyp_len < ref_len:
        brevity_penalty = math.exp(1 - ref_len / hyp_len)
    else:
        brevity_penalty = 1.0

    score = brevity_penalty * math.exp(sum(_log(p) for p in precisions) / NGRAM_ORDER)

    return BleuResult(
        score=score,
        precisions=tuple(precisions),
        brevity_penalty=brevity_penalty,
        hyp_len=hyp_len,
        ref_len=ref_len,
    )
