"""
Core domain model: boxes, prompts, triples, segmentation maps and the
geometric helpers every other module builds on.
"""

from gerdsenai_vprompt.core.model import (
    IMAGE_LEVEL_TASKS,
    AnnotationRecord,
    BBox,
    FreeFormPrompt,
    Modality,
    PointPrompt,
    PromptKind,
    SegmentationMap,
    TaskKind,
    Triple,
    VisualPrompt,
    referenced_marks,
)
from gerdsenai_vprompt.core.geometry import (
    clamp_box,
    full_image_box,
    geometric_iou,
)

__all__ = [
    "IMAGE_LEVEL_TASKS",
    "AnnotationRecord",
    "BBox",
    "FreeFormPrompt",
    "Modality",
    "PointPrompt",
    "PromptKind",
    "SegmentationMap",
    "TaskKind",
    "Triple",
    "VisualPrompt",
    "referenced_marks",
    "clamp_box",
    "full_image_box",
    "geometric_iou",
]
