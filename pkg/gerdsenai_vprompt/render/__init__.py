"""
Set-of-Marks overlay rendering.
"""

from gerdsenai_vprompt.render.font import block_size, glyph, glyph_block, text_mask
from gerdsenai_vprompt.render.marks import (
    PNG_COMPRESS_LEVEL,
    decode_image,
    encode_png,
    label_anchor,
    render_marks,
    render_triple,
)
from gerdsenai_vprompt.render.style import PALETTE, RenderStyle, label_color

__all__ = [
    "PALETTE",
    "PNG_COMPRESS_LEVEL",
    "RenderStyle",
    "block_size",
    "decode_image",
    "encode_png",
    "glyph",
    "glyph_block",
    "label_anchor",
    "label_color",
    "render_marks",
    "render_triple",
    "text_mask",
]
