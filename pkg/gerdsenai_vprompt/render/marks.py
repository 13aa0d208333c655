"""
Set-of-Marks rasterizer.

Shapes are drawn first in prompt order, then one label block per mark,
so a later shape never hides an earlier label. Nothing is anti-aliased.
"""

import io
import logging
import math
from typing import Callable, Dict, Iterable, Optional, Tuple

from PIL import Image, ImageDraw, UnidentifiedImageError

from gerdsenai_vprompt.core.geometry import clamp_box
from gerdsenai_vprompt.core.model import BBox, PromptKind, Triple, VisualPrompt
from gerdsenai_vprompt.errors import DecodeError
from gerdsenai_vprompt.render.font import block_size, glyph_block
from gerdsenai_vprompt.render.style import RenderStyle, label_color
from gerdsenai_vprompt.synth.prompts import freeform_to_box

logger = logging.getLogger(__name__)

PNG_COMPRESS_LEVEL = 6

Size = Tuple[int, int]


def _pixel_box(b: BBox) -> Tuple[int, int, int, int]:
    """Inclusive integer corners covering a float box."""
    return (
        int(math.floor(b.x)),
        int(math.floor(b.y)),
        int(math.ceil(b.x2)) - 1,
        int(math.ceil(b.y2)) - 1,
    )


def _visible(prompt: VisualPrompt, size: Size) -> bool:
    width, height = size
    payload = prompt.payload
    if prompt.kind is PromptKind.POINT:
        return payload.inside(width, height)
    if prompt.kind is PromptKind.FREE_FORM:
        return not freeform_to_box(payload, size).degenerate
    return not clamp_box(payload, width, height).degenerate


def _draw_box(draw: ImageDraw.ImageDraw, prompt: VisualPrompt, color, style: RenderStyle, size: Size):
    box = clamp_box(prompt.payload, *size)
    draw.rectangle(_pixel_box(box), outline=color, width=style.stroke_width)


def _draw_point(draw: ImageDraw.ImageDraw, prompt: VisualPrompt, color, style: RenderStyle, size: Size):
    cx, cy = int(prompt.payload.x), int(prompt.payload.y)
    r = style.point_radius
    if r == 0:
        draw.point((cx, cy), fill=color)
    else:
        draw.ellipse((cx - r, cy - r, cx + r, cy + r), fill=color)


def _draw_freeform(draw: ImageDraw.ImageDraw, prompt: VisualPrompt, color, style: RenderStyle, size: Size):
    verts = [(int(round(x)), int(round(y))) for x, y in prompt.payload.vertices]
    if len(verts) == 1:
        draw.point(verts[0], fill=color)
    else:
        draw.line(verts, fill=color, width=style.stroke_width)


_DRAWERS: Dict[PromptKind, Callable] = {
    PromptKind.BOX: _draw_box,
    PromptKind.FULL_IMAGE: _draw_box,
    PromptKind.POINT: _draw_point,
    PromptKind.FREE_FORM: _draw_freeform,
}


def label_anchor(prompt: VisualPrompt, style: RenderStyle, image_size: Size) -> Tuple[int, int]:
    """Top-left pixel of the label block for *prompt*, kept inside the image.

    Boxes and strokes are labelled at their top-left corner; points just
    right of the disc so the label does not hide the point.
    """
    width, height = image_size
    if prompt.kind is PromptKind.POINT:
        r = style.point_radius
        ax, ay = int(prompt.payload.x) + r + 1, int(prompt.payload.y) - r
    elif prompt.kind is PromptKind.FREE_FORM:
        x0, y0, _, _ = _pixel_box(freeform_to_box(prompt.payload, image_size))
        ax, ay = x0, y0
    else:
        x0, y0, _, _ = _pixel_box(clamp_box(prompt.payload, width, height))
        ax, ay = x0, y0
    bw, bh = block_size(str(prompt.mark_id), style.label_scale)
    ax = min(max(ax, 0), max(width - bw, 0))
    ay = min(max(ay, 0), max(height - bh, 0))
    return ax, ay


def render_marks(
    image: Image.Image,
    prompts: Iterable[VisualPrompt],
    style: Optional[RenderStyle] = None,
) -> Image.Image:
    """Draw *prompts* onto a copy of *image* and return the copy."""
    style = style or RenderStyle()
    out = image.convert("RGB") if image.mode != "RGB" else image.copy()
    size = out.size
    draw = ImageDraw.Draw(out)

    shown = []
    for prompt in prompts:
        if not _visible(prompt, size):
            logger.warning(
                "Skipping mark %d: %s prompt lies outside the %dx%d image",
                prompt.mark_id, prompt.kind.value, *size,
            )
            continue
        _DRAWERS[prompt.kind](draw, prompt, style.color(prompt.mark_id), style, size)
        shown.append(prompt)

    for prompt in shown:
        color = style.color(prompt.mark_id)
        block = glyph_block(str(prompt.mark_id), style.label_scale, label_color(color), color)
        out.paste(block, label_anchor(prompt, style, size))
    return out


def encode_png(image: Image.Image) -> bytes:
    buf = io.BytesIO()
    image.save(buf, format="PNG", compress_level=PNG_COMPRESS_LEVEL, optimize=False)
    return buf.getvalue()


def decode_image(data: bytes, path: str = "<bytes>") -> Image.Image:
    try:
        with Image.open(io.BytesIO(data)) as img:
            img.load()
            return img.convert("RGB")
    except (UnidentifiedImageError, OSError) as e:
        raise DecodeError(path, f"cannot decode image: {e}") from e


def render_triple(
    triple: Triple,
    image_bytes: bytes,
    style: Optional[RenderStyle] = None,
) -> bytes:
    """Decode, overlay the triple's marks, and re-encode as PNG."""
    image = decode_image(image_bytes, triple.image_path or triple.id)
    if image.size != triple.image_size:
        logger.warning(
            "%s: image is %dx%d but triple says %dx%d",
            triple.id, *image.size, *triple.image_size,
        )
    return encode_png(render_marks(image, triple.prompts, style))
