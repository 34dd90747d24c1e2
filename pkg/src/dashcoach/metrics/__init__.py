"""Evaluation metrics: accuracy rate, corpus BLEU, BERTScore."""

from .ar import ARResult, ERJudgement, accuracy_rate, judge
from .bertscore import BertScoreResult, EmbeddingMatrix, bert_score, corpus_bert_score
from .bleu import BleuResult, corpus_bleu, tokenize_13a

__all__ = [
    "ARResult",
    "ERJudgement",
    "accuracy_rate",
    "judge",
    "BertScoreResult",
    "EmbeddingMatrix",
    "bert_score",
    "corpus_bert_score",
    "BleuResult",
    "corpus_bleu",
    "tokenize_13a",
]
