"""
Visual prompt synthesis.

- Box noise: B' = B + N(0, diag((aw)^2, (ah)^2, (aw)^2, (ah)^2)) over
  (x, y, w, h), sizes floored at ``min_size``, optionally clamped.
- Patch points: one uniform pixel per patch cell, labelled from the
  segmentation map.
- Mask points: K uniform pixels from a binary mask.
- Free-form strokes reduce to their bounding box at inference.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Tuple, Union

import numpy as np

from gerdsenai_vprompt.core.geometry import clamp_box
from gerdsenai_vprompt.core.model import (
    BBox,
    FreeFormPrompt,
    PointPrompt,
    PromptKind,
    SegmentationMap,
    VisualPrompt,
)
from gerdsenai_vprompt.errors import InconsistentLegendError, InvalidArgumentError
from gerdsenai_vprompt.synth.rng import Rng

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.1
DEFAULT_PATCH_PX = 32


@dataclass(frozen=True)
class AugmentConfig:
    """Box noise settings.

    ``alpha`` is the per-coordinate standard deviation as a fraction of
    the box's own width (x, w) or height (y, h).
    """

    alpha: float = DEFAULT_ALPHA
    clamp_to_image: bool = True
    min_size: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise InvalidArgumentError(f"alpha must be finite and >= 0, got {self.alpha}")
        if not math.isfinite(self.min_size) or self.min_size < 1:
            raise InvalidArgumentError(f"min_size must be >= 1, got {self.min_size}")


def jitter_box(b: BBox, cfg: AugmentConfig, rng: Rng) -> BBox:
    """One Gaussian draw around *b* with the size floor applied, unclamped."""
    if not isinstance(b, BBox):
        raise InvalidArgumentError(f"expected a BBox, got {type(b).__name__}")
    eps = rng.normal(4)
    sx = cfg.alpha * b.w
    sy = cfg.alpha * b.h
    x = b.x + float(eps[0]) * sx
    y = b.y + float(eps[1]) * sy
    w = max(b.w + float(eps[2]) * sx, cfg.min_size)
    h = max(b.h + float(eps[3]) * sy, cfg.min_size)
    return BBox(x, y, w, h)


def augment_box(
    b: BBox, cfg: AugmentConfig, rng: Rng, image_size: Tuple[int, int]
) -> BBox:
    """Perturb a ground-truth box to simulate a loose, user-drawn prompt."""
    jittered = jitter_box(b, cfg, rng)
    if not cfg.clamp_to_image:
        return jittered
    return clamp_box(jittered, *image_size)


def sample_patch_points(
    seg: SegmentationMap, patch_px: int, rng: Rng
) -> List[Tuple[PointPrompt, str]]:
    """Tile the map into patch_px cells and draw one labelled point per cell.

    Partial cells on the right and bottom edges are kept. Cells are
    visited in raster order; points landing on ``ignore_id`` are dropped.
    """
    if patch_px < 1:
        raise InvalidArgumentError(f"patch_px must be >= 1, got {patch_px}")
    if not seg.legend and bool(np.any(seg.class_ids != seg.ignore_id)):
        raise InconsistentLegendError("legend is empty but the map has labelled pixels")

    points = []
    for y0 in range(0, seg.height, patch_px):
        ch = min(patch_px, seg.height - y0)
        for x0 in range(0, seg.width, patch_px):
            cw = min(patch_px, seg.width - x0)
            px = x0 + rng.integer(cw)
            py = y0 + rng.integer(ch)
            cid = seg.class_at(px, py)
            if cid == seg.ignore_id:
                continue
            name = seg.legend.get(cid)
            if name is None:
                raise InconsistentLegendError(f"class id {cid} at ({px}, {py}) not in legend")
            points.append((PointPrompt(px, py), name))
    return points


MaskLike = Union[np.ndarray, Iterable[Tuple[int, int]]]


def _mask_coords(mask: MaskLike) -> List[Tuple[int, int]]:
    if isinstance(mask, np.ndarray):
        return [(int(c), int(r)) for r, c in np.argwhere(mask)]
    return sorted({(int(x), int(y)) for x, y in mask}, key=lambda p: (p[1], p[0]))


def sample_mask_points(mask: MaskLike, k: int, rng: Rng) -> List[PointPrompt]:
    """Draw *k* uniform pixels from a mask.

    *mask* is a boolean (height, width) array or a collection of (x, y)
    pixels. Sampling is without replacement when the mask has at least
    *k* pixels.
    """
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    coords = _mask_coords(mask)
    if not coords:
        raise InvalidArgumentError("cannot sample points from an empty mask")
    picks = rng.choice(len(coords), size=k, replace=len(coords) < k)
    return [PointPrompt(*coords[int(i)]) for i in picks]


def sample_class_points(
    seg: SegmentationMap, k: int, rng: Rng
) -> List[Tuple[PointPrompt, str]]:
    """K points per class present in the map, all carrying that class's label."""
    points = []
    for cid in np.unique(seg.class_ids):
        cid = int(cid)
        if cid == seg.ignore_id:
            continue
        name = seg.legend.get(cid)
        if name is None:
            raise InconsistentLegendError(f"class id {cid} not in legend")
        for point in sample_mask_points(seg.class_ids == cid, k, rng):
            points.append((point, name))
    return points


def freeform_to_box(f: FreeFormPrompt, image_size: Tuple[int, int]) -> BBox:
    """Bounding box of a free-form stroke, clamped, never smaller than 1x1."""
    xs = [x for x, _ in f.vertices]
    ys = [y for _, y in f.vertices]
    x0, y0 = min(xs), min(ys)
    width, height = image_size
    box = clamp_box(BBox(x0, y0, max(max(xs) - x0, 1.0), max(max(ys) - y0, 1.0)), width, height)
    if box.degenerate:
        return box
    # a stroke hugging the right or bottom edge widens inwards
    x = min(box.x, width - 1.0)
    y = min(box.y, height - 1.0)
    return BBox(x, y, max(box.x2, x + 1.0) - x, max(box.y2, y + 1.0) - y)


def infer_box(prompt: VisualPrompt, image_size: Tuple[int, int]) -> VisualPrompt:
    """Reduce any prompt to a box prompt for inference, keeping its mark."""
    if prompt.kind is PromptKind.FULL_IMAGE:
        return prompt
    width, height = image_size
    payload = prompt.payload
    if isinstance(payload, FreeFormPrompt):
        box = freeform_to_box(payload, image_size)
    elif isinstance(payload, PointPrompt):
        box = clamp_box(BBox(payload.x, payload.y, 1, 1), width, height)
    else:
        box = clamp_box(payload, width, height)
    if box.degenerate:
        logger.warning("Mark %d lies outside the %dx%d image", prompt.mark_id, width, height)
    return VisualPrompt(kind=PromptKind.BOX, payload=box, mark_id=prompt.mark_id)
