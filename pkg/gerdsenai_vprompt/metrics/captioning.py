"""
Caption metrics: sentence BLEU-n, ROUGE-1 / ROUGE-L F1 and CIDEr.

All inputs go through :func:`normalize` first so every metric sees the
same tokens.
"""

import math
from typing import List, Sequence

from nltk.translate.bleu_score import brevity_penalty, closest_ref_length, modified_precision
from pycocoevalcap.cider.cider import Cider
from rouge_score import rouge_scorer

from gerdsenai_vprompt.errors import DegenerateCorpusError, InvalidArgumentError
from gerdsenai_vprompt.metrics.text import check_range, normalize

MAX_BLEU_ORDER = 4


def bleu_n(candidate: str, references: Sequence[str], n_max: int = 4) -> float:
    """Uniform-weight sentence BLEU up to order *n_max*, no smoothing.

    Orders longer than the candidate have no n-grams and are left out,
    so the geometric mean runs over ``min(n_max, len(candidate))``
    orders and a one-word label matching its reference scores 1.

    Args:
        candidate: Predicted text.
        references: One or more reference texts; n-gram counts are
            clipped by the maximum count over all of them.
        n_max: Highest n-gram order, 1 to 4.

    Returns:
        The score in [0, 1]. Any zero modified precision among the
        counted orders gives 0, as does an empty candidate.
    """
    if not 1 <= n_max <= MAX_BLEU_ORDER:
        raise InvalidArgumentError(f"n_max must be in 1..{MAX_BLEU_ORDER}, got {n_max}")
    if not references:
        raise InvalidArgumentError("bleu needs at least one reference")
    hyp = normalize(candidate)
    if not hyp:
        return 0.0
    refs = [normalize(r) for r in references]

    orders = min(n_max, len(hyp))
    log_sum = 0.0
    for n in range(1, orders + 1):
        p = float(modified_precision(refs, hyp, n))
        if p == 0.0:
            return 0.0
        log_sum += math.log(p)
    bp = brevity_penalty(closest_ref_length(refs, len(hyp)), len(hyp))
    return check_range(f"bleu{n_max}", bp * math.exp(log_sum / orders), 0.0, 1.0)


class _Tokenizer:
    """rouge_score tokenizer hook using our normalization."""

    def tokenize(self, text: str) -> List[str]:
        return normalize(text)


_ROUGE = rouge_scorer.RougeScorer(["rouge1", "rougeL"], tokenizer=_Tokenizer())


def _rouge(kind: str, candidate: str, reference: str) -> float:
    cand, ref = normalize(candidate), normalize(reference)
    if not cand and not ref:
        return 1.0
    if not cand or not ref:
        return 0.0
    score = _ROUGE.score(reference, candidate)[kind].fmeasure
    return check_range(kind, score, 0.0, 1.0)


def rouge_l(candidate: str, reference: str) -> float:
    """LCS-based F1 (beta = 1)."""
    return _rouge("rougeL", candidate, reference)


def rouge_1(candidate: str, reference: str) -> float:
    """Unigram-overlap F1."""
    return _rouge("rouge1", candidate, reference)


def cider_scores(candidates: Sequence[str], references: Sequence[Sequence[str]]) -> List[float]:
    """Per-item CIDEr (n = 1..4, x10) with IDF taken over this corpus."""
    if len(candidates) != len(references):
        raise InvalidArgumentError(
            f"{len(candidates)} candidates but {len(references)} reference lists"
        )
    if len(candidates) < 2:
        raise DegenerateCorpusError(
            f"CIDEr needs at least 2 corpus items for document frequencies, got {len(candidates)}"
        )
    gts, res = {}, {}
    for i, (cand, refs) in enumerate(zip(candidates, references)):
        if not refs:
            raise InvalidArgumentError(f"item {i} has no references")
        gts[i] = [" ".join(normalize(r)) for r in refs]
        res[i] = [" ".join(normalize(cand))]
    _, scores = Cider().compute_score(gts, res)
    return [check_range("cider", float(s), 0.0, None) for s in scores]


def cider(candidates: Sequence[str], references: Sequence[Sequence[str]]) -> float:
    """Corpus CIDEr: the mean of :func:`cider_scores`."""
    per_item = cider_scores(candidates, references)
    return check_range("cider", sum(per_item) / len(per_item), 0.0, None)
