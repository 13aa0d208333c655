"""
Built-in 5x7 bitmap digits for mark labels.

A label block is the digits on a solid background with a one-cell
border and one empty column between glyphs, all scaled by an integer
factor. Labels are numerals only.
"""

from typing import Dict, Tuple

import numpy as np
from PIL import Image

from gerdsenai_vprompt.errors import InvalidArgumentError

GLYPH_W = 5
GLYPH_H = 7

_DIGITS: Dict[str, Tuple[str, ...]] = {
    "0": (".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."),
    "1": ("..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."),
    "2": (".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"),
    "3": ("#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."),
    "4": ("...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."),
    "5": ("#####", "#....", "####.", "....#", "....#", "#...#", ".###."),
    "6": ("..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."),
    "7": ("#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."),
    "8": (".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."),
    "9": (".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."),
}


def glyph(ch: str) -> np.ndarray:
    """Boolean (7, 5) bitmap for one digit."""
    if ch not in _DIGITS:
        raise InvalidArgumentError(f"no glyph for {ch!r}; labels are digits only")
    return np.array([[c == "#" for c in row] for row in _DIGITS[ch]], dtype=bool)


def block_size(text: str, scale: int) -> Tuple[int, int]:
    """(width, height) in pixels of the label block for *text*."""
    return (len(text) * (GLYPH_W + 1) + 1) * scale, (GLYPH_H + 2) * scale


def text_mask(text: str, scale: int) -> np.ndarray:
    """Boolean mask of the block, True where digit ink goes."""
    cols = len(text) * (GLYPH_W + 1) + 1
    mask = np.zeros((GLYPH_H + 2, cols), dtype=bool)
    for i, ch in enumerate(text):
        x0 = 1 + i * (GLYPH_W + 1)
        mask[1 : 1 + GLYPH_H, x0 : x0 + GLYPH_W] = glyph(ch)
    return np.kron(mask, np.ones((scale, scale), dtype=bool)).astype(bool)


def glyph_block(text: str, scale: int, fg, bg) -> Image.Image:
    """RGB label block: *fg* digits on a *bg* rectangle."""
    mask = text_mask(text, scale)
    pixels = np.empty(mask.shape + (3,), dtype=np.uint8)
    pixels[...] = bg
    pixels[mask] = fg
    return Image.fromarray(pixels)
