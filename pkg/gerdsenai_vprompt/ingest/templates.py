"""
Instruction templates.

The defaults are the task instructions used to build the corpus. A
template may place the prompt identifiers itself with a ``{marks}``
slot; otherwise the identifiers are written on a line above it.
"""

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

from gerdsenai_vprompt.core.model import (
    BBox,
    FreeFormPrompt,
    PromptKind,
    TaskKind,
    VisualPrompt,
)
from gerdsenai_vprompt.errors import MissingTemplateError, SchemaError, SlotError
from gerdsenai_vprompt.synth.rng import Rng

_IDENTIFY_REGION = "Please identify the object category of each marked region in the image."
_IDENTIFY_POINT = "Please identify the labels of each marked point in the image."
_BRIEF_REGION = "Please provide a brief caption of each marked region in the image."
_DETAILED_POINT = "Please provide a detailed caption of each marked point in the image."
_DETAILED_REGION = "Please provide a detailed caption of each marked region in the image."
_RELATION = "Please analyze the relationship between all marked regions in the image."
_SUMMARY = "Please provide a summarized caption based on all the marked regions in the image."
_INTERACT = "Please analyze how the marked objects interact with each other in the given scene."

DEFAULT_INSTRUCTIONS: Dict[TaskKind, Tuple[str, ...]] = {
    TaskKind.REFERRING_OBJECT_CLASSIFICATION: (_IDENTIFY_REGION, _IDENTIFY_POINT),
    TaskKind.SCENE_CLASSIFICATION: (_IDENTIFY_REGION,),
    TaskKind.IMAGE_CAPTION_BRIEF: (_BRIEF_REGION,),
    TaskKind.IMAGE_CAPTION_DETAILED: (_DETAILED_REGION,),
    TaskKind.REGION_CAPTION_BRIEF: (_BRIEF_REGION,),
    TaskKind.REGION_CAPTION_DETAILED: (_DETAILED_POINT, _DETAILED_REGION),
    TaskKind.RELATIONSHIP_ANALYSIS: (_RELATION, _INTERACT),
    TaskKind.SUMMARY_CAPTION: (_SUMMARY,),
}

_SLOT_RE = re.compile(r"\{[A-Za-z_]+\}")


@dataclass(frozen=True)
class TemplateSet:
    """Instruction strings per task."""

    templates: Dict[TaskKind, Tuple[str, ...]] = field(default_factory=dict)

    @classmethod
    def default(cls) -> "TemplateSet":
        return cls(dict(DEFAULT_INSTRUCTIONS))

    def get(self, task: TaskKind) -> Tuple[str, ...]:
        return self.templates.get(TaskKind(task), ())

    def with_variants(self, task: TaskKind, variants: Sequence[str]) -> "TemplateSet":
        """Copy of this set with *variants* appended to *task*'s list."""
        merged = dict(self.templates)
        merged[TaskKind(task)] = tuple(merged.get(TaskKind(task), ())) + tuple(variants)
        return TemplateSet(merged)


def load_templates(path: Union[str, Path]) -> TemplateSet:
    """Load user variants ``{"<task>": ["...", ...]}`` on top of the defaults."""
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise SchemaError("$", "template file must be a JSON object")
    templates = TemplateSet.default()
    for key, variants in data.items():
        try:
            task = TaskKind(key)
        except ValueError:
            raise SchemaError(key, "unknown task") from None
        if not isinstance(variants, list) or not all(isinstance(v, str) for v in variants):
            raise SchemaError(key, "expected a list of strings")
        templates = templates.with_variants(task, variants)
    return templates


def select_instruction(
    task: TaskKind,
    templates: TemplateSet,
    rng: Rng,
    prompt_kind: Optional[PromptKind] = None,
) -> str:
    """Pick one template for *task* uniformly at random.

    With *prompt_kind*, templates worded for the other kind of prompt
    ("point" vs "region") are left out unless nothing else remains.
    """
    candidates = templates.get(task)
    if not candidates:
        raise MissingTemplateError(f"no instruction template for task {TaskKind(task).value}")
    if prompt_kind is not None:
        other = "region" if PromptKind(prompt_kind) is PromptKind.POINT else "point"
        fitting = tuple(t for t in candidates if other not in t.lower())
        if fitting:
            candidates = fitting
    return candidates[rng.integer(len(candidates))]


def _fmt(value: float) -> str:
    return f"{value:g}"


def _describe(prompt: VisualPrompt, coords_in_text: bool) -> str:
    if not coords_in_text:
        return prompt.token
    payload = prompt.payload
    if isinstance(payload, BBox):
        coords = ", ".join(_fmt(v) for v in payload.as_list())
        return f"{prompt.token} [{coords}]"
    if isinstance(payload, FreeFormPrompt):
        coords = ", ".join(f"({_fmt(x)}, {_fmt(y)})" for x, y in payload.vertices)
        return f"{prompt.token} [{coords}]"
    return f"{prompt.token} ({_fmt(payload.x)}, {_fmt(payload.y)})"


def render_question(
    template: str, prompts: Sequence[VisualPrompt], coords_in_text: bool = False
) -> str:
    """Fill a template with the prompts' identifiers."""
    marks = " ".join(_describe(p, coords_in_text) for p in prompts)
    if "{marks}" in template:
        text = template.replace("{marks}", marks)
    else:
        text = f"{marks}\n{template}"
    leftover = _SLOT_RE.findall(text)
    if leftover:
        raise SlotError(f"unresolved template slots: {', '.join(leftover)}", slots=leftover)
    return text
