"""
Shared domain types.

Coordinates: origin at the image's top-left corner, x to the right,
y downward, continuous pixel units. Boxes are (x, y, w, h).
All records are frozen; operations build new values.
"""

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

from gerdsenai_vprompt.errors import InvalidArgumentError, TripleInvariantError

# "<Mark 3>" / "<Region 12>" identifiers used in instructions and answers
MARK_TOKEN_RE = re.compile(r"<(Mark|Region) (\d+)>")


class Modality(str, Enum):
    OPTICAL = "optical"
    SAR = "sar"
    INFRARED = "infrared"
    NATURAL = "natural"


class TaskKind(str, Enum):
    IMAGE_CAPTION_BRIEF = "image_caption_brief"
    IMAGE_CAPTION_DETAILED = "image_caption_detailed"
    SCENE_CLASSIFICATION = "scene_classification"
    REFERRING_OBJECT_CLASSIFICATION = "referring_object_classification"
    REGION_CAPTION_BRIEF = "region_caption_brief"
    REGION_CAPTION_DETAILED = "region_caption_detailed"
    RELATIONSHIP_ANALYSIS = "relationship_analysis"
    SUMMARY_CAPTION = "summary_caption"


# Tasks answered about the whole image through a full-image box.
IMAGE_LEVEL_TASKS = frozenset(
    {
        TaskKind.IMAGE_CAPTION_BRIEF,
        TaskKind.IMAGE_CAPTION_DETAILED,
        TaskKind.SCENE_CLASSIFICATION,
        TaskKind.SUMMARY_CAPTION,
    }
)


class PromptKind(str, Enum):
    BOX = "box"
    POINT = "point"
    FREE_FORM = "free_form"
    FULL_IMAGE = "full_image"


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box: top-left corner plus width and height, in pixels.

    ``degenerate`` is set by ``clamp_box`` when the box had to be replaced
    by a 1x1 stand-in; it does not take part in equality.
    """

    x: float
    y: float
    w: float
    h: float
    degenerate: bool = field(default=False, compare=False)

    def __post_init__(self):
        for name in ("x", "y", "w", "h"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not _finite(self.x, self.y, self.w, self.h):
            raise InvalidArgumentError(f"box values must be finite: {self.as_list()}")
        if self.w <= 0 or self.h <= 0:
            raise InvalidArgumentError(f"box size must be positive: {self.as_list()}")

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def area(self) -> float:
        return self.w * self.h

    def as_list(self) -> List[float]:
        return [self.x, self.y, self.w, self.h]


@dataclass(frozen=True)
class PointPrompt:
    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not _finite(self.x, self.y):
            raise InvalidArgumentError(f"point must be finite: ({self.x}, {self.y})")

    def inside(self, width: int, height: int) -> bool:
        return 0 <= self.x < width and 0 <= self.y < height


@dataclass(frozen=True)
class FreeFormPrompt:
    """A user-drawn stroke or polygon as an ordered vertex list."""

    vertices: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        if not verts:
            raise InvalidArgumentError("free-form prompt needs at least one vertex")
        if not all(_finite(x, y) for x, y in verts):
            raise InvalidArgumentError("free-form vertices must be finite")
        object.__setattr__(self, "vertices", verts)


Payload = Union[BBox, PointPrompt, FreeFormPrompt]

_PAYLOAD_TYPES = {
    PromptKind.BOX: BBox,
    PromptKind.FULL_IMAGE: BBox,
    PromptKind.POINT: PointPrompt,
    PromptKind.FREE_FORM: FreeFormPrompt,
}


@dataclass(frozen=True)
class VisualPrompt:
    """A geometric cue with its human-facing mark number.

    ``raw_box`` optionally keeps the pre-clamp box produced by the
    augmenter so the unclamped draw can be audited later.
    """

    kind: PromptKind
    payload: Payload
    mark_id: int = 1
    raw_box: Optional[BBox] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", PromptKind(self.kind))
        if isinstance(self.mark_id, bool) or not isinstance(self.mark_id, int):
            raise InvalidArgumentError(f"mark_id must be an int, got {self.mark_id!r}")
        if self.mark_id < 1:
            raise InvalidArgumentError(f"mark_id must be >= 1, got {self.mark_id}")
        expected = _PAYLOAD_TYPES[self.kind]
        if not isinstance(self.payload, expected):
            raise InvalidArgumentError(
                f"{self.kind.value} prompt needs a {expected.__name__} payload, "
                f"got {type(self.payload).__name__}"
            )

    @property
    def token_word(self) -> str:
        """Identifier word used in text: points are Marks, the rest Regions."""
        return "Mark" if self.kind is PromptKind.POINT else "Region"

    @property
    def token(self) -> str:
        return f"<{self.token_word} {self.mark_id}>"

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value, "mark_id": self.mark_id}
        if isinstance(self.payload, BBox):
            data["box"] = self.payload.as_list()
        elif isinstance(self.payload, PointPrompt):
            data["point"] = [self.payload.x, self.payload.y]
        else:
            data["vertices"] = [[x, y] for x, y in self.payload.vertices]
        if self.raw_box is not None:
            data["raw_box"] = self.raw_box.as_list()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VisualPrompt":
        kind = PromptKind(data["kind"])
        if kind in (PromptKind.BOX, PromptKind.FULL_IMAGE):
            payload: Payload = BBox(*data["box"])
        elif kind is PromptKind.POINT:
            payload = PointPrompt(*data["point"])
        else:
            payload = FreeFormPrompt(tuple(tuple(v) for v in data["vertices"]))
        raw = data.get("raw_box")
        return cls(
            kind=kind,
            payload=payload,
            mark_id=data["mark_id"],
            raw_box=BBox(*raw) if raw is not None else None,
        )


@dataclass(frozen=True)
class Triple:
    """One image / visual-prompt / text sample."""

    id: str
    image_path: str
    image_size: Tuple[int, int]
    modality: Modality
    prompts: Tuple[VisualPrompt, ...]
    task: TaskKind
    question: str
    answer: str

    def __post_init__(self):
        object.__setattr__(self, "modality", Modality(self.modality))
        object.__setattr__(self, "task", TaskKind(self.task))
        object.__setattr__(self, "prompts", tuple(self.prompts))
        object.__setattr__(
            self, "image_size", (int(self.image_size[0]), int(self.image_size[1]))
        )

    @property
    def width(self) -> int:
        return self.image_size[0]

    @property
    def height(self) -> int:
        return self.image_size[1]

    @property
    def mark_ids(self) -> List[int]:
        return [p.mark_id for p in self.prompts]

    def validate(self) -> "Triple":
        """Check every Triple invariant; returns self for chaining."""
        width, height = self.image_size
        if width <= 0 or height <= 0:
            raise TripleInvariantError(f"{self.id}: image size must be positive")
        if not self.prompts:
            raise TripleInvariantError(f"{self.id}: triple has no prompts")
        ids = self.mark_ids
        if len(set(ids)) != len(ids):
            raise TripleInvariantError(f"{self.id}: duplicate mark ids {ids}")
        for p in self.prompts:
            if p.kind is PromptKind.FULL_IMAGE and p.payload != BBox(0, 0, width, height):
                raise TripleInvariantError(
                    f"{self.id}: full-image prompt must be [0, 0, {width}, {height}]"
                )
        known = set(ids)
        for field_name in ("question", "answer"):
            for ref in referenced_marks(getattr(self, field_name)):
                if ref not in known:
                    raise TripleInvariantError(
                        f"{self.id}: {field_name} references mark {ref}, "
                        f"prompts only have {sorted(known)}"
                    )
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "image": self.image_path,
            "width": self.width,
            "height": self.height,
            "modality": self.modality.value,
            "task": self.task.value,
            "prompts": [p.to_dict() for p in self.prompts],
            "question": self.question,
            "answer": self.answer,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Triple":
        return cls(
            id=data["id"],
            image_path=data["image"],
            image_size=(data["width"], data["height"]),
            modality=Modality(data["modality"]),
            prompts=tuple(VisualPrompt.from_dict(p) for p in data["prompts"]),
            task=TaskKind(data["task"]),
            question=data["question"],
            answer=data["answer"],
        )


@dataclass(frozen=True)
class AnnotationRecord:
    """Detection ground truth for one image."""

    image_path: str
    image_size: Tuple[int, int]
    instances: Tuple[Tuple[str, BBox], ...]
    image_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))
        object.__setattr__(
            self, "image_size", (int(self.image_size[0]), int(self.image_size[1]))
        )
        for category, _ in self.instances:
            if not isinstance(category, str) or not category.strip():
                raise InvalidArgumentError(
                    f"{self.image_path}: category must be a non-empty string"
                )


@dataclass(frozen=True, eq=False)
class SegmentationMap:
    """Per-pixel class ids with a legend.

    ``class_ids`` is a (height, width) integer array, so row-major order
    matches the raster's scan order.
    """

    width: int
    height: int
    class_ids: Any
    legend: Dict[int, str]
    ignore_id: int = 255

    def class_at(self, x: int, y: int) -> int:
        return int(self.class_ids[y, x])

    def name_at(self, x: int, y: int) -> Optional[str]:
        """Class name at a pixel, or None for ignore pixels."""
        cid = self.class_at(x, y)
        if cid == self.ignore_id:
            return None
        return self.legend.get(cid)


def referenced_marks(text: str) -> List[int]:
    """Mark numbers referenced by "<Mark n>" / "<Region n>" tokens, in order."""
    return [int(m.group(2)) for m in MARK_TOKEN_RE.finditer(text)]
