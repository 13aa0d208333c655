"""
Set-of-Marks overlay style.

Mark n is drawn in PALETTE[(n - 1) % len(PALETTE)], so a mark keeps its
colour across runs and across images.
"""

from dataclasses import dataclass
from typing import Tuple

from gerdsenai_vprompt.errors import InvalidArgumentError

RGB = Tuple[int, int, int]

PALETTE: Tuple[RGB, ...] = (
    (255, 75, 75),    # red
    (75, 150, 255),   # blue
    (75, 220, 75),    # green
    (255, 200, 50),   # yellow
    (200, 100, 255),  # purple
    (255, 150, 50),   # orange
    (50, 220, 220),   # cyan
    (255, 100, 175),  # pink
)

LABEL_DARK: RGB = (0, 0, 0)
LABEL_LIGHT: RGB = (255, 255, 255)


@dataclass(frozen=True)
class RenderStyle:
    stroke_width: int = 2
    palette: Tuple[RGB, ...] = PALETTE
    label_scale: int = 2
    point_radius: int = 4

    def __post_init__(self):
        if self.stroke_width < 1:
            raise InvalidArgumentError(f"stroke_width must be >= 1, got {self.stroke_width}")
        if not self.palette:
            raise InvalidArgumentError("palette must not be empty")
        if self.label_scale < 1:
            raise InvalidArgumentError(f"label_scale must be >= 1, got {self.label_scale}")
        if self.point_radius < 0:
            raise InvalidArgumentError(f"point_radius must be >= 0, got {self.point_radius}")
        object.__setattr__(self, "palette", tuple(tuple(int(v) for v in c) for c in self.palette))

    def color(self, mark_id: int) -> RGB:
        return self.palette[(mark_id - 1) % len(self.palette)]


def label_color(background: RGB) -> RGB:
    """Dark digits on light marks, light digits on dark marks."""
    r, g, b = background
    luminance = 0.299 * r + 0.587 * g + 0.114 * b
    return LABEL_DARK if luminance > 150 else LABEL_LIGHT
