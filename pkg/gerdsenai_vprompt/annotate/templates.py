"""
Role / format annotation templates.

Slots:
    {marks}        "Mark 1: ship, Mark 2: harbor"
    {categories}   distinct categories in first-seen order
    {task_goal}    the template's own goal sentence

The bundled defaults are reconstructions of the intent of the role and
format blocks, not verbatim copies of any published prompt. They only use
{marks}, so each category and each "Mark n" appears once.
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Mapping, Sequence, Tuple

from gerdsenai_vprompt.core.model import TaskKind
from gerdsenai_vprompt.errors import InvalidArgumentError, SlotError

SLOTS = ("categories", "marks", "task_goal")
_SLOT_RE = re.compile(r"\{([A-Za-z_]+)\}")


class AnnotationTask(str, Enum):
    BRIEF_CAPTION = "brief_caption"
    DETAILED_CAPTION = "detailed_caption"
    RELATIONSHIP_ANALYSIS = "relationship_analysis"


# CLI short names
TEMPLATE_ALIASES: Dict[str, AnnotationTask] = {
    "brief": AnnotationTask.BRIEF_CAPTION,
    "detailed": AnnotationTask.DETAILED_CAPTION,
    "relationship": AnnotationTask.RELATIONSHIP_ANALYSIS,
}

_ROC = TaskKind.REFERRING_OBJECT_CLASSIFICATION

COMPATIBLE_TASKS: Dict[AnnotationTask, FrozenSet[TaskKind]] = {
    AnnotationTask.BRIEF_CAPTION: frozenset(
        {
            _ROC,
            TaskKind.REGION_CAPTION_BRIEF,
            TaskKind.IMAGE_CAPTION_BRIEF,
            TaskKind.SCENE_CLASSIFICATION,
        }
    ),
    AnnotationTask.DETAILED_CAPTION: frozenset(
        {
            _ROC,
            TaskKind.REGION_CAPTION_DETAILED,
            TaskKind.IMAGE_CAPTION_DETAILED,
            TaskKind.SUMMARY_CAPTION,
        }
    ),
    AnnotationTask.RELATIONSHIP_ANALYSIS: frozenset(
        {_ROC, TaskKind.RELATIONSHIP_ANALYSIS, TaskKind.SUMMARY_CAPTION}
    ),
}


@dataclass(frozen=True)
class AnnotationTemplate:
    task: AnnotationTask
    role_text: str
    format_text: str
    task_goal: str = ""

    def __post_init__(self):
        object.__setattr__(self, "task", AnnotationTask(self.task))
        unknown = sorted(
            {s for s in _SLOT_RE.findall(self.role_text + self.format_text) if s not in SLOTS}
        )
        if unknown:
            raise SlotError(f"unknown template slot(s): {', '.join(unknown)}", slots=unknown)

    def accepts(self, task: TaskKind) -> bool:
        return TaskKind(task) in COMPATIBLE_TASKS[self.task]

    def render(self, marks: Sequence[Tuple[int, str]]) -> str:
        """Fill the slots from ``(mark_id, category)`` pairs.

        Raises SlotError when a used slot has nothing to fill it with.
        """
        if not marks:
            raise SlotError("no marks to describe", slots=["marks"])
        values = {
            "marks": ", ".join(f"Mark {mid}: {cat}" for mid, cat in marks),
            "categories": ", ".join(dict.fromkeys(cat for _, cat in marks)),
            "task_goal": self.task_goal,
        }
        text = f"{self.role_text}\n\n{self.format_text}"
        empty = sorted({s for s in _SLOT_RE.findall(text) if not values.get(s)})
        if empty:
            raise SlotError(f"unfilled template slot(s): {', '.join(empty)}", slots=empty)
        return _SLOT_RE.sub(lambda m: values[m.group(1)], text)


_ROLE = (
    "<Role> You are an expert annotator of remote sensing imagery. "
    "Objects in the image are outlined and labelled with numbered marks. "
    "The marked objects are: {marks}."
)

_FORMAT = (
    "<Format> {task_goal} Refer to every object by its mark number, keep the given "
    "object names, and say nothing about objects without a mark."
)

DEFAULT_TEMPLATES: Dict[AnnotationTask, AnnotationTemplate] = {
    AnnotationTask.BRIEF_CAPTION: AnnotationTemplate(
        task=AnnotationTask.BRIEF_CAPTION,
        role_text=_ROLE,
        format_text=_FORMAT,
        task_goal="Write one short sentence for each marked object.",
    ),
    AnnotationTask.DETAILED_CAPTION: AnnotationTemplate(
        task=AnnotationTask.DETAILED_CAPTION,
        role_text=_ROLE,
        format_text=_FORMAT,
        task_goal=(
            "Describe each marked object in detail: its appearance, its position "
            "in the scene and what surrounds it."
        ),
    ),
    AnnotationTask.RELATIONSHIP_ANALYSIS: AnnotationTemplate(
        task=AnnotationTask.RELATIONSHIP_ANALYSIS,
        role_text=_ROLE,
        format_text=_FORMAT,
        task_goal="Describe the spatial and functional relationships between the marked objects.",
    ),
}


def get_template(name: str) -> AnnotationTemplate:
    """Default template by task value or CLI alias."""
    task = TEMPLATE_ALIASES.get(name)
    if task is None:
        try:
            task = AnnotationTask(name)
        except ValueError:
            raise InvalidArgumentError(
                f"unknown annotation template {name!r}; "
                f"choose from {', '.join(TEMPLATE_ALIASES)}"
            ) from None
    return DEFAULT_TEMPLATES[task]


def template_from_dict(data: Mapping[str, str]) -> AnnotationTemplate:
    return AnnotationTemplate(
        task=AnnotationTask(data["task"]),
        role_text=data["role_text"],
        format_text=data["format_text"],
        task_goal=data.get("task_goal", ""),
    )
