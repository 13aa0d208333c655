"""
Triple builders.

Each builder derives a child ``Rng`` from the image id, so a triple does
not depend on which other images were built before it.
"""

import logging
from typing import Iterable, List, Optional, Sequence, Tuple

from gerdsenai_vprompt.core.geometry import clamp_box, full_image_box
from gerdsenai_vprompt.core.model import (
    IMAGE_LEVEL_TASKS,
    AnnotationRecord,
    Modality,
    PointPrompt,
    PromptKind,
    SegmentationMap,
    TaskKind,
    Triple,
    VisualPrompt,
)
from gerdsenai_vprompt.errors import InvalidArgumentError
from gerdsenai_vprompt.ingest.templates import (
    TemplateSet,
    render_question,
    select_instruction,
)
from gerdsenai_vprompt.synth.prompts import (
    AugmentConfig,
    jitter_box,
    sample_class_points,
    sample_patch_points,
)
from gerdsenai_vprompt.synth.rng import Rng

logger = logging.getLogger(__name__)

ROC = TaskKind.REFERRING_OBJECT_CLASSIFICATION


def format_answer(prompts: Sequence[VisualPrompt], labels: Sequence[str]) -> str:
    """One "<Region n>: label" (or "<Mark n>: label") line per prompt."""
    return "\n".join(f"{p.token}: {label}" for p, label in zip(prompts, labels))


def build_box_triples(
    records: Iterable[AnnotationRecord],
    templates: TemplateSet,
    cfg: AugmentConfig,
    rng: Rng,
    modality: Modality = Modality.OPTICAL,
    coords_in_text: bool = False,
) -> List[Triple]:
    """Referring-object-classification triples from detection records.

    Prompts are the perturbed ground-truth boxes, numbered from 1 in
    instance order. A draw that leaves the image is dropped and the
    remaining marks close up; a record left with no prompt yields no triple.
    """
    triples = []
    for record in records:
        image_id = record.image_id or record.image_path
        if not record.instances:
            logger.warning("%s: no instances, skipped", image_id)
            continue
        item_rng = rng.derive(image_id)
        width, height = record.image_size
        prompts = []
        labels = []
        for i, (category, box) in enumerate(record.instances, start=1):
            raw = jitter_box(box, cfg, item_rng)
            final = clamp_box(raw, width, height) if cfg.clamp_to_image else raw
            if final.degenerate:
                logger.warning("%s: instance %d drifted off the image, dropped", image_id, i)
                continue
            prompts.append(
                VisualPrompt(
                    kind=PromptKind.BOX,
                    payload=final,
                    mark_id=len(prompts) + 1,
                    raw_box=raw if raw != final else None,
                )
            )
            labels.append(category)
        if not prompts:
            logger.warning("%s: every instance drifted off the image, skipped", image_id)
            continue
        template = select_instruction(ROC, templates, item_rng, PromptKind.BOX)
        triples.append(
            Triple(
                id=f"{image_id}-box",
                image_path=record.image_path,
                image_size=record.image_size,
                modality=modality,
                prompts=tuple(prompts),
                task=ROC,
                question=render_question(template, prompts, coords_in_text),
                answer=format_answer(prompts, labels),
            ).validate()
        )
    return triples


def _point_triple(
    labelled: List[Tuple[PointPrompt, str]],
    seg: SegmentationMap,
    templates: TemplateSet,
    rng: Rng,
    triple_id: str,
    image_path: str,
    modality: Modality,
    coords_in_text: bool,
) -> Optional[Triple]:
    if not labelled:
        logger.warning("%s: every sampled point is unlabelled, skipped", triple_id)
        return None
    prompts = [
        VisualPrompt(kind=PromptKind.POINT, payload=point, mark_id=i)
        for i, (point, _) in enumerate(labelled, start=1)
    ]
    template = select_instruction(ROC, templates, rng, PromptKind.POINT)
    return Triple(
        id=triple_id,
        image_path=image_path,
        image_size=(seg.width, seg.height),
        modality=modality,
        prompts=tuple(prompts),
        task=ROC,
        question=render_question(template, prompts, coords_in_text),
        answer=format_answer(prompts, [name for _, name in labelled]),
    ).validate()


def build_point_triples(
    seg: SegmentationMap,
    templates: TemplateSet,
    patch_px: int,
    rng: Rng,
    image_path: str = "",
    image_id: Optional[str] = None,
    modality: Modality = Modality.OPTICAL,
    coords_in_text: bool = False,
) -> List[Triple]:
    """One point triple per map: a labelled point per patch cell."""
    image_id = image_id or image_path or "segmentation"
    item_rng = rng.derive(image_id)
    labelled = sample_patch_points(seg, patch_px, item_rng)
    triple = _point_triple(
        labelled, seg, templates, item_rng, f"{image_id}-point",
        image_path, modality, coords_in_text,
    )
    return [triple] if triple else []


def build_mask_point_triples(
    seg: SegmentationMap,
    templates: TemplateSet,
    k: int,
    rng: Rng,
    image_path: str = "",
    image_id: Optional[str] = None,
    modality: Modality = Modality.OPTICAL,
    coords_in_text: bool = False,
) -> List[Triple]:
    """One triple with K points per class, every point of a class sharing its label."""
    image_id = image_id or image_path or "segmentation"
    item_rng = rng.derive(image_id)
    labelled = sample_class_points(seg, k, item_rng)
    triple = _point_triple(
        labelled, seg, templates, item_rng, f"{image_id}-kpoint",
        image_path, modality, coords_in_text,
    )
    return [triple] if triple else []


def build_image_level_triple(
    image_size: Tuple[int, int],
    modality: Modality,
    task: TaskKind,
    text: str,
    templates: TemplateSet,
    rng: Rng,
    image_path: str = "",
    image_id: Optional[str] = None,
) -> Triple:
    """Caption / scene-class triple whose only prompt is the full-image box."""
    task = TaskKind(task)
    if task not in IMAGE_LEVEL_TASKS:
        raise InvalidArgumentError(f"{task.value} is not an image-level task")
    if not text or not text.strip():
        raise InvalidArgumentError("image-level triple needs non-empty answer text")
    image_id = image_id or image_path or "image"
    prompts = [full_image_box(*image_size)]
    template = select_instruction(task, templates, rng.derive(image_id), PromptKind.FULL_IMAGE)
    return Triple(
        id=f"{image_id}-{task.value}",
        image_path=image_path,
        image_size=image_size,
        modality=modality,
        prompts=tuple(prompts),
        task=task,
        question=render_question(template, prompts),
        answer=text.strip(),
    ).validate()
