"""
Embedding-space similarity between a predicted and a reference label.

``ss`` is the cosine of the two pooled sentence embeddings.

``s_iou`` matches tokens in both directions: a predicted token counts
when some reference token is identical or has cosine above tau, and the
same the other way round. The score is the matched count over |A| + |B|.
"""

from typing import List, Optional

import numpy as np

from gerdsenai_vprompt.metrics.embeddings import EmbeddingTable, OovPolicy, sentence_embedding
from gerdsenai_vprompt.metrics.text import MetricConfig, check_range


def ss(pred: str, gt: str, table: EmbeddingTable, cfg: Optional[MetricConfig] = None) -> float:
    """Cosine of the two sentence embeddings.

    Args:
        pred: Predicted text.
        gt: Reference text.
        table: Word vectors.
        cfg: Tokenization settings; ``tau`` is not used here.

    Returns:
        A value in [-1, 1]; 0 when either side has no known token.
    """
    cfg = cfg or MetricConfig()
    a = sentence_embedding(pred, table, cfg)
    b = sentence_embedding(gt, table, cfg)
    if not a.any() or not b.any():
        return 0.0
    return check_range("ss", float(np.dot(a, b)), -1.0, 1.0)


def _token_set(text: str, table: EmbeddingTable, cfg: MetricConfig) -> List[str]:
    tokens = list(dict.fromkeys(cfg.tokens(text)))
    if table.oov_policy is OovPolicy.SKIP_TOKEN:
        tokens = [t for t in tokens if t in table]
    return tokens


def _unit_rows(tokens: List[str], table: EmbeddingTable) -> np.ndarray:
    rows = np.array([table.lookup(t) for t in tokens], dtype=np.float64).reshape(len(tokens), table.dim)
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    return np.divide(rows, norms, out=np.zeros_like(rows), where=norms > 0)


def s_iou(pred: str, gt: str, table: EmbeddingTable, cfg: Optional[MetricConfig] = None) -> float:
    """Soft intersection over union of the two token sets.

    Args:
        pred: Predicted text.
        gt: Reference text.
        table: Word vectors; its OOV policy decides whether unknown
            tokens are dropped or kept as zero vectors.
        cfg: Tokenization settings and the threshold ``tau``.

    Returns:
        A value in [0, 1], symmetric in its text arguments and
        non-increasing in ``tau``. Two empty sets score 1.
    """
    cfg = cfg or MetricConfig()
    a = _token_set(pred, table, cfg)
    b = _token_set(gt, table, cfg)
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0

    cos = _unit_rows(a, table) @ _unit_rows(b, table).T
    same = np.array([[ta == tb for tb in b] for ta in a])
    matched = (cos > cfg.tau) | same
    score = (matched.any(axis=1).sum() + matched.any(axis=0).sum()) / (len(a) + len(b))
    return check_range("s_iou", float(score), 0.0, 1.0)
