"""
Annotation request and result records.
"""

import hashlib
import re
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Tuple

from gerdsenai_vprompt.annotate.templates import AnnotationTask, AnnotationTemplate
from gerdsenai_vprompt.core.model import PromptKind, Triple
from gerdsenai_vprompt.errors import InvalidArgumentError, SlotError
from gerdsenai_vprompt.render import RenderStyle, render_triple

# "<Region 2>: harbor" answer lines
_ANSWER_LINE_RE = re.compile(r"^<(?:Mark|Region) (\d+)>:\s*(.+?)\s*$", re.MULTILINE)

FULL_IMAGE_CATEGORY = "whole scene"


@dataclass(frozen=True)
class AnnotationRequest:
    overlay_png: bytes
    prompt_text: str
    task: AnnotationTask
    triple_id: str
    marks: Tuple[Tuple[int, str], ...] = ()

    def __post_init__(self):
        if not self.prompt_text.strip():
            raise InvalidArgumentError(f"{self.triple_id}: prompt_text is empty")

    def digest(self) -> bytes:
        """SHA-256 over everything a provider sees."""
        h = hashlib.sha256()
        h.update(self.overlay_png)
        h.update(b"\0")
        h.update(self.prompt_text.encode("utf-8"))
        return h.digest()


@dataclass(frozen=True)
class AnnotationResult:
    """Provider output for one triple; ``error`` is set instead of ``text`` on failure."""

    triple_id: str
    text: str
    provider: str
    latency_ms: int = 0
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"triple_id": self.triple_id}
        if self.error is None:
            data["text"] = self.text
        else:
            data["error"] = self.error
        data["provider"] = self.provider
        data["latency_ms"] = self.latency_ms
        return data


def answer_categories(answer: str) -> Dict[int, str]:
    """Categories keyed by mark id, read from "<Region n>: category" answer lines."""
    return {int(mid): cat for mid, cat in _ANSWER_LINE_RE.findall(answer)}


def mark_categories(
    triple: Triple, categories: Optional[Mapping[int, str]] = None
) -> Tuple[Tuple[int, str], ...]:
    """``(mark_id, category)`` for every prompt of *triple*, in prompt order.

    Without explicit *categories* they come from the triple's answer lines;
    a full-image prompt falls back to "whole scene".
    """
    known = dict(answer_categories(triple.answer))
    if categories:
        known.update(categories)
    pairs = []
    for prompt in triple.prompts:
        category = known.get(prompt.mark_id)
        if not category and prompt.kind is PromptKind.FULL_IMAGE:
            category = FULL_IMAGE_CATEGORY
        if not category:
            raise SlotError(
                f"{triple.id}: no category for mark {prompt.mark_id}",
                slots=["marks"],
                mark_id=prompt.mark_id,
            )
        pairs.append((prompt.mark_id, category))
    return tuple(pairs)


def build_request(
    triple: Triple,
    image_bytes: bytes,
    template: AnnotationTemplate,
    style: Optional[RenderStyle] = None,
    categories: Optional[Mapping[int, str]] = None,
) -> AnnotationRequest:
    """Render the overlay and fill the template for one triple.

    Args:
        triple: Source triple; its marks become the request's marks.
        image_bytes: Encoded image the overlay is drawn on.
        template: Must accept the triple's task.
        style: Overlay style; defaults to :class:`RenderStyle`.
        categories: Mark id to category overrides; otherwise taken from
            the triple's answer.

    Returns:
        The request, ready for a provider.

    Raises:
        InvalidArgumentError: if the template does not fit the task.
        SlotError: if a mark has no category or a slot stays unfilled.
    """
    if not template.accepts(triple.task):
        raise InvalidArgumentError(
            f"{triple.id}: template {template.task.value} does not apply "
            f"to {triple.task.value} triples"
        )
    marks = mark_categories(triple, categories)
    prompt_text = template.render(marks)
    return AnnotationRequest(
        overlay_png=render_triple(triple, image_bytes, style),
        prompt_text=prompt_text,
        task=template.task,
        triple_id=triple.id,
        marks=marks,
    )
