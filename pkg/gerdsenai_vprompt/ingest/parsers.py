"""
Annotation parsers.

Formats:
    canonical detection JSON
        {"images": [{"id", "file", "width", "height",
                     "instances": [{"category", "bbox": [x, y, w, h]}]}]}
    COCO instance JSON
        {"images": [{"id", "file_name", "width", "height"}],
         "annotations": [{"image_id", "category_id", "bbox"}],
         "categories": [{"id", "name"}]}
    segmentation
        single-channel PNG of class ids + legend JSON
        {"ignore_id": int, "classes": {"<id>": "<name>"}}
"""

import io
import json
import logging
import numbers
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from PIL import Image, UnidentifiedImageError

from gerdsenai_vprompt.core.geometry import clamp_box
from gerdsenai_vprompt.core.model import AnnotationRecord, BBox, SegmentationMap
from gerdsenai_vprompt.errors import (
    DecodeError,
    InconsistentLegendError,
    InvalidArgumentError,
    ParseError,
    SchemaError,
)

logger = logging.getLogger(__name__)

# Pillow modes that carry one integer channel
_SINGLE_CHANNEL_MODES = {"L", "P", "I", "I;16", "I;16B", "I;16L"}


def load_json_bytes(data: bytes, path: Optional[str] = None) -> Any:
    """Decode UTF-8 JSON, reporting failures with a byte offset."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"invalid UTF-8: {e.reason}", offset=e.start, path=path) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        offset = len(text[: e.pos].encode("utf-8"))
        raise ParseError(e.msg, offset=offset, path=path) from None


def require_field(obj: Any, key: str, kind, where: str) -> Any:
    if not isinstance(obj, dict):
        raise SchemaError(where, "expected an object")
    if key not in obj:
        raise SchemaError(f"{where}.{key}", "missing field")
    value = obj[key]
    if kind is numbers.Real:
        ok = isinstance(value, numbers.Real) and not isinstance(value, bool)
    elif kind is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    else:
        ok = isinstance(value, kind)
    if not ok:
        raise SchemaError(f"{where}.{key}", f"expected {getattr(kind, '__name__', kind)}")
    return value


def image_size_field(obj: Dict, where: str) -> Tuple[int, int]:
    width = require_field(obj, "width", int, where)
    height = require_field(obj, "height", int, where)
    if width <= 0 or height <= 0:
        raise SchemaError(where, f"image size must be positive, got {width}x{height}")
    return width, height


def _box(value: Any, where: str) -> BBox:
    if (
        not isinstance(value, list)
        or len(value) != 4
        or not all(isinstance(v, numbers.Real) and not isinstance(v, bool) for v in value)
    ):
        raise SchemaError(where, "expected [x, y, w, h]")
    try:
        return BBox(*value)
    except InvalidArgumentError as e:
        raise SchemaError(where, str(e)) from None


def _clamped_instance(
    category: str, box: BBox, size: Tuple[int, int], where: str
) -> Optional[Tuple[str, BBox]]:
    clamped = clamp_box(box, *size)
    if clamped.degenerate:
        logger.warning("%s: box %s lies outside the image, dropped", where, box.as_list())
        return None
    if clamped != box:
        logger.warning("%s: box %s clamped to %s", where, box.as_list(), clamped.as_list())
    return category, clamped


def _category(value: Any, where: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise SchemaError(where, "category must be a non-empty string")
    return value


def parse_canonical_detection(data: bytes, path: Optional[str] = None) -> List[AnnotationRecord]:
    """One record per image, instances in file order, boxes clamped."""
    doc = load_json_bytes(data, path)
    images = require_field(doc, "images", list, "$")
    records = []
    for i, image in enumerate(images):
        where = f"images[{i}]"
        file_name = require_field(image, "file", str, where)
        size = image_size_field(image, where)
        image_id = str(image.get("id", file_name))
        instances = []
        for j, inst in enumerate(require_field(image, "instances", list, where)):
            iwhere = f"{where}.instances[{j}]"
            category = _category(require_field(inst, "category", str, iwhere), f"{iwhere}.category")
            box = _box(require_field(inst, "bbox", list, iwhere), f"{iwhere}.bbox")
            kept = _clamped_instance(category, box, size, iwhere)
            if kept:
                instances.append(kept)
        records.append(
            AnnotationRecord(
                image_path=file_name, image_size=size, instances=instances, image_id=image_id
            )
        )
    return records


def parse_coco_detection(data: bytes, path: Optional[str] = None) -> List[AnnotationRecord]:
    """COCO instance annotations grouped per image, in the file's image order."""
    doc = load_json_bytes(data, path)
    categories = {}
    for i, cat in enumerate(require_field(doc, "categories", list, "$")):
        where = f"categories[{i}]"
        categories[require_field(cat, "id", int, where)] = _category(
            require_field(cat, "name", str, where), f"{where}.name"
        )

    images = []
    by_id: Dict[Any, List[Tuple[str, BBox]]] = {}
    for i, image in enumerate(require_field(doc, "images", list, "$")):
        where = f"images[{i}]"
        image_id = require_field(image, "id", (int, str), where)
        file_name = require_field(image, "file_name", str, where)
        images.append((image_id, file_name, image_size_field(image, where)))
        by_id[image_id] = []

    sizes = {image_id: size for image_id, _, size in images}
    for i, ann in enumerate(require_field(doc, "annotations", list, "$")):
        where = f"annotations[{i}]"
        image_id = require_field(ann, "image_id", (int, str), where)
        if image_id not in by_id:
            raise SchemaError(f"{where}.image_id", f"unknown image id {image_id!r}")
        cat_id = require_field(ann, "category_id", int, where)
        if cat_id not in categories:
            raise SchemaError(f"{where}.category_id", f"unknown category id {cat_id}")
        box = _box(require_field(ann, "bbox", list, where), f"{where}.bbox")
        kept = _clamped_instance(categories[cat_id], box, sizes[image_id], where)
        if kept:
            by_id[image_id].append(kept)

    return [
        AnnotationRecord(
            image_path=file_name,
            image_size=size,
            instances=by_id[image_id],
            image_id=str(image_id),
        )
        for image_id, file_name, size in images
    ]


def parse_legend(data: bytes, path: Optional[str] = None) -> Tuple[Dict[int, str], int]:
    """Legend JSON to (id -> name, ignore_id)."""
    doc = load_json_bytes(data, path)
    ignore_id = require_field(doc, "ignore_id", int, "$")
    classes = require_field(doc, "classes", dict, "$")
    legend = {}
    for key, name in classes.items():
        try:
            cid = int(key)
        except ValueError:
            raise SchemaError(f"classes.{key}", "class id must be an integer") from None
        legend[cid] = _category(name, f"classes.{key}")
    return legend, ignore_id


def parse_segmentation(
    raster: bytes, legend_bytes: bytes, path: Optional[str] = None
) -> SegmentationMap:
    """Decode a class-id raster and check every labelled id is in the legend."""
    legend, ignore_id = parse_legend(legend_bytes, path)
    try:
        with Image.open(io.BytesIO(raster)) as img:
            img.load()
            if img.mode not in _SINGLE_CHANNEL_MODES:
                raise ParseError(f"expected a single-channel raster, got mode {img.mode}", path=path)
            class_ids = np.asarray(img, dtype=np.int64)
    except (UnidentifiedImageError, OSError) as e:
        raise DecodeError(path or "<raster>", str(e)) from None

    present = {int(v) for v in np.unique(class_ids)}
    missing = sorted(present - set(legend) - {ignore_id})
    if missing:
        raise InconsistentLegendError(
            f"{path or '<raster>'}: class ids {missing} are not in the legend"
        )
    height, width = class_ids.shape
    return SegmentationMap(
        width=width, height=height, class_ids=class_ids, legend=legend, ignore_id=ignore_id
    )
