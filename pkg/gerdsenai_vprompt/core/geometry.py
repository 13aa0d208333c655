"""
Pure geometric helpers shared by every module.
"""

from gerdsenai_vprompt.core.model import BBox, PromptKind, VisualPrompt
from gerdsenai_vprompt.errors import InvalidArgumentError


def full_image_box(width: int, height: int) -> VisualPrompt:
    """The [0, 0, width, height] prompt that turns image tasks into region tasks."""
    if width <= 0 or height <= 0:
        raise InvalidArgumentError(f"image size must be positive, got {width}x{height}")
    return VisualPrompt(
        kind=PromptKind.FULL_IMAGE,
        payload=BBox(0, 0, width, height),
        mark_id=1,
    )


def clamp_box(b: BBox, width: int, height: int) -> BBox:
    """Intersect *b* with the image rectangle.

    An empty intersection yields a 1x1 box at the nearest in-bounds
    corner with ``degenerate=True``; callers skip those rather than abort.
    """
    x0 = max(b.x, 0.0)
    y0 = max(b.y, 0.0)
    x1 = min(b.x2, float(width))
    y1 = min(b.y2, float(height))
    if x1 > x0 and y1 > y0:
        return BBox(x0, y0, x1 - x0, y1 - y0)
    cx = min(max(b.x, 0.0), float(width - 1))
    cy = min(max(b.y, 0.0), float(height - 1))
    return BBox(cx, cy, 1, 1, degenerate=True)


def geometric_iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes by area."""
    iw = min(a.x2, b.x2) - max(a.x, b.x)
    ih = min(a.y2, b.y2) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    return min(1.0, inter / union)
