"""
Zero-shot classification accuracy.
"""

from typing import Optional, Sequence

from gerdsenai_vprompt.errors import InvalidArgumentError
from gerdsenai_vprompt.metrics.embeddings import EmbeddingTable
from gerdsenai_vprompt.metrics.semantic import ss
from gerdsenai_vprompt.metrics.text import MetricConfig, check_range

MATCHERS = ("exact", "semantic")


def accuracy(
    preds: Sequence[str],
    gts: Sequence[str],
    matcher: str = "exact",
    table: Optional[EmbeddingTable] = None,
    cfg: Optional[MetricConfig] = None,
) -> float:
    """Fraction of predictions that match their label.

    ``exact`` compares normalized token sequences; ``semantic`` counts a
    prediction whose ss with the label exceeds tau.
    """
    if len(preds) != len(gts):
        raise InvalidArgumentError(f"{len(preds)} predictions but {len(gts)} labels")
    if not preds:
        raise InvalidArgumentError("accuracy needs at least one prediction")
    if matcher not in MATCHERS:
        raise InvalidArgumentError(f"unknown matcher {matcher!r}; choose exact or semantic")
    cfg = cfg or MetricConfig()
    if matcher == "semantic" and table is None:
        raise InvalidArgumentError("semantic matching needs an embedding table")

    correct = 0
    for pred, gt in zip(preds, gts):
        if matcher == "exact":
            correct += cfg.tokens(pred) == cfg.tokens(gt)
        else:
            correct += ss(pred, gt, table, cfg) > cfg.tau
    return check_range("accuracy", correct / len(preds), 0.0, 1.0)
