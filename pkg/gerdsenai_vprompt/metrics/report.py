"""
Score reports and the id-joined evaluation used by ``vprompt eval``.

Prediction / ground-truth files are JSONL records ``{"id", "text"}``;
ground truth may give ``"refs"`` (a list of strings) instead of ``"text"``.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from gerdsenai_vprompt.errors import InvalidArgumentError, ParseError, SchemaError, UsageError
from gerdsenai_vprompt.metrics.captioning import bleu_n, cider_scores, rouge_1, rouge_l
from gerdsenai_vprompt.metrics.classification import accuracy
from gerdsenai_vprompt.metrics.embeddings import EmbeddingTable
from gerdsenai_vprompt.metrics.semantic import s_iou, ss
from gerdsenai_vprompt.metrics.text import MetricConfig

logger = logging.getLogger(__name__)

# Metrics scored per sample against the best-matching reference.
_BEST_OF_REFS: Dict[str, Callable[..., float]] = {
    "rouge_1": rouge_1,
    "rouge_l": rouge_l,
}
_SEMANTIC = {"ss": ss, "s_iou": s_iou}

METRIC_NAMES = (
    "ss",
    "s_iou",
    "bleu1",
    "bleu2",
    "bleu3",
    "bleu4",
    "rouge_1",
    "rouge_l",
    "cider",
    "accuracy",
    "accuracy_semantic",
)


@dataclass(frozen=True)
class ScoreReport:
    metric: str
    scores: Tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.scores)

    @property
    def mean(self) -> float:
        return sum(self.scores) / len(self.scores) if self.scores else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {"metric": self.metric, "n": self.n, "mean": self.mean, "scores": list(self.scores)}


def format_table(reports: Sequence[ScoreReport]) -> str:
    """Aligned plain-text table: metric, n, mean."""
    rows = [("metric", "n", "mean")]
    rows += [(r.metric, str(r.n), f"{r.mean:.4f}") for r in reports]
    widths = [max(len(row[i]) for row in rows) for i in range(3)]
    lines = [
        f"{row[0]:<{widths[0]}}  {row[1]:>{widths[1]}}  {row[2]:>{widths[2]}}" for row in rows
    ]
    return "\n".join(lines)


def parse_metric_names(spec: Union[str, Sequence[str]]) -> List[str]:
    names = [n.strip() for n in spec.split(",")] if isinstance(spec, str) else list(spec)
    names = [n for n in names if n]
    unknown = [n for n in names if n not in METRIC_NAMES]
    if unknown:
        raise UsageError(
            f"unknown metric(s): {', '.join(unknown)}; choose from {', '.join(METRIC_NAMES)}"
        )
    if not names:
        raise UsageError("no metrics requested")
    return names


def load_records(path: Union[str, Path], allow_refs: bool = False) -> Dict[str, List[str]]:
    """Read ``{"id", "text"}`` JSONL into ``id -> [texts]``; a repeated id keeps the last record."""
    records: Dict[str, List[str]] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(e.msg, line=lineno, path=str(path)) from e
            where = f"{path}:{lineno}"
            if not isinstance(obj, dict) or not isinstance(obj.get("id"), str):
                raise SchemaError(f"{where}.id", "expected a string id")
            if allow_refs and "refs" in obj:
                refs = obj["refs"]
                if not isinstance(refs, list) or not refs or not all(isinstance(r, str) for r in refs):
                    raise SchemaError(f"{where}.refs", "expected a non-empty list of strings")
                texts = list(refs)
            elif isinstance(obj.get("text"), str):
                texts = [obj["text"]]
            else:
                raise SchemaError(f"{where}.text", "expected a string")
            if obj["id"] in records:
                logger.warning("%s: duplicate id %r, keeping the last record", where, obj["id"])
            records[obj["id"]] = texts
    return records


def join_records(
    preds: Mapping[str, Sequence[str]],
    gts: Mapping[str, Sequence[str]],
    strict: bool = True,
) -> List[Tuple[str, str, List[str]]]:
    """Pair each ground-truth id with its prediction, in sorted id order."""
    joined = []
    missing = []
    for key in sorted(gts):
        if key not in preds:
            missing.append(key)
            continue
        joined.append((key, preds[key][0], list(gts[key])))
    extra = sorted(set(preds) - set(gts))
    if missing or extra:
        detail = f"{len(missing)} id(s) without prediction, {len(extra)} prediction(s) without ground truth"
        if strict:
            raise InvalidArgumentError(f"id mismatch: {detail} (first: {(missing + extra)[0]})")
        logger.warning("Skipping unmatched ids: %s", detail)
    if not joined:
        raise InvalidArgumentError("no predictions share an id with the ground truth")
    return joined


def evaluate(
    preds: Mapping[str, Sequence[str]],
    gts: Mapping[str, Sequence[str]],
    metric_names: Union[str, Sequence[str]],
    table: Optional[EmbeddingTable] = None,
    cfg: Optional[MetricConfig] = None,
    strict: bool = True,
) -> List[ScoreReport]:
    """Score predictions against ground truth for each requested metric.

    Args:
        preds: id to candidate texts; the first text is scored.
        gts: id to reference texts.
        metric_names: Comma-separated string or list of metric names.
        table: Word vectors, required by the semantic metrics.
        cfg: Tokenization and threshold settings.
        strict: Fail on ids present on only one side instead of skipping.

    Returns:
        One report per metric, in request order.
    """
    cfg = cfg or MetricConfig()
    names = parse_metric_names(metric_names)
    if table is None and any(n in _SEMANTIC or n == "accuracy_semantic" for n in names):
        raise UsageError("ss, s_iou and accuracy_semantic need an embedding table (--embeddings)")
    joined = join_records(preds, gts, strict)
    cands = [pred for _, pred, _ in joined]
    refs = [r for _, _, r in joined]

    reports = []
    for name in names:
        if name in _SEMANTIC:
            fn = _SEMANTIC[name]
            scores = [max(fn(c, r, table, cfg) for r in rs) for c, rs in zip(cands, refs)]
        elif name in _BEST_OF_REFS:
            fn = _BEST_OF_REFS[name]
            scores = [max(fn(c, r) for r in rs) for c, rs in zip(cands, refs)]
        elif name.startswith("bleu"):
            order = int(name[-1])
            scores = [bleu_n(c, rs, order) for c, rs in zip(cands, refs)]
        elif name == "cider":
            scores = cider_scores(cands, refs)
        else:
            matcher = "semantic" if name == "accuracy_semantic" else "exact"
            scores = [
                accuracy([c], [rs[0]], matcher=matcher, table=table, cfg=cfg)
                for c, rs in zip(cands, refs)
            ]
        reports.append(ScoreReport(metric=name, scores=tuple(scores)))
        logger.debug("%s over %d samples", name, len(scores))
    return reports
