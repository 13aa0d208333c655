"""
Evaluation metrics.

Semantic label metrics (ss, s_iou) over a word-embedding table, caption
metrics (BLEU-n, ROUGE-1, ROUGE-L, CIDEr) and classification accuracy.
Every score is range-checked before it is returned.
"""

from gerdsenai_vprompt.metrics.captioning import bleu_n, cider, cider_scores, rouge_1, rouge_l
from gerdsenai_vprompt.metrics.classification import accuracy
from gerdsenai_vprompt.metrics.embeddings import (
    EmbeddingTable,
    OovPolicy,
    load_embeddings,
    sentence_embedding,
)
from gerdsenai_vprompt.metrics.report import (
    METRIC_NAMES,
    ScoreReport,
    evaluate,
    format_table,
    join_records,
    load_records,
    parse_metric_names,
)
from gerdsenai_vprompt.metrics.semantic import s_iou, ss
from gerdsenai_vprompt.metrics.text import DEFAULT_TAU, MetricConfig, check_range, normalize

__all__ = [
    "DEFAULT_TAU",
    "EmbeddingTable",
    "METRIC_NAMES",
    "MetricConfig",
    "OovPolicy",
    "ScoreReport",
    "accuracy",
    "bleu_n",
    "check_range",
    "cider",
    "cider_scores",
    "evaluate",
    "format_table",
    "join_records",
    "load_embeddings",
    "load_records",
    "normalize",
    "parse_metric_names",
    "rouge_1",
    "rouge_l",
    "s_iou",
    "sentence_embedding",
    "ss",
]
