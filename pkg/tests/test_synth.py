"""Tests for prompt synthesis: box noise, point sampling, free-form reduction."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))
from gerdsenai_vprompt.core import (  # noqa: E402
    BBox,
    FreeFormPrompt,
    PointPrompt,
    PromptKind,
    SegmentationMap,
    VisualPrompt,
    geometric_iou,
)
from gerdsenai_vprompt.errors import (  # noqa: E402
    InconsistentLegendError,
    InvalidArgumentError,
)
from gerdsenai_vprompt.synth import (  # noqa: E402
    AugmentConfig,
    Rng,
    augment_box,
    freeform_to_box,
    infer_box,
    jitter_box,
    sample_class_points,
    sample_mask_points,
    sample_patch_points,
)


def _seg(class_ids, legend=None, ignore_id=255):
    class_ids = np.asarray(class_ids, dtype=np.int64)
    height, width = class_ids.shape
    return SegmentationMap(
        width=width,
        height=height,
        class_ids=class_ids,
        legend={0: "water", 1: "farmland"} if legend is None else legend,
        ignore_id=ignore_id,
    )


# ── Rng ───────────────────────────────────────────────────────────


def test_rng_same_seed_same_draws():
    assert np.array_equal(Rng(3).normal(8), Rng(3).normal(8))


def test_rng_derive_ignores_parent_position():
    parent = Rng(11)
    first = parent.derive("img-1").normal(4)
    parent.normal(100)
    assert np.array_equal(parent.derive("img-1").normal(4), first)
    assert not np.array_equal(parent.derive("img-2").normal(4), first)


# ── box augmentation ──────────────────────────────────────────────


def test_alpha_zero_is_identity():
    box = BBox(12.5, 30, 40, 22)
    cfg = AugmentConfig(alpha=0.0)
    assert augment_box(box, cfg, Rng(0), (200, 200)) == box


def test_negative_alpha_rejected():
    with pytest.raises(InvalidArgumentError):
        AugmentConfig(alpha=-0.1)


def test_jitter_moments_match_gaussian():
    box = BBox(100, 100, 50, 80)
    cfg = AugmentConfig(alpha=0.1)
    rng = Rng(2024)
    draws = np.array([jitter_box(box, cfg, rng).as_list() for _ in range(100_000)])

    means = draws.mean(axis=0)
    assert np.all(np.abs(means - np.array([100, 100, 50, 80])) < 0.5)
    stds = draws.std(axis=0)
    assert abs(stds[0] - 5.0) < 0.03 * 5.0
    assert abs(stds[1] - 8.0) < 0.03 * 8.0


def test_small_noise_keeps_overlap():
    box = BBox(100, 100, 50, 80)
    cfg = AugmentConfig(alpha=0.05)
    rng = Rng(7)
    hits = sum(
        geometric_iou(box, augment_box(box, cfg, rng, (1000, 1000))) > 0.5
        for _ in range(10_000)
    )
    assert hits >= 9_900


def test_augmented_box_stays_in_image():
    box = BBox(0, 0, 30, 30)
    cfg = AugmentConfig(alpha=0.5)
    rng = Rng(1)
    for _ in range(500):
        out = augment_box(box, cfg, rng, (64, 64))
        assert out.x >= 0 and out.y >= 0
        assert out.x2 <= 64 and out.y2 <= 64


def test_augment_without_clamp_keeps_raw_draw():
    box = BBox(0, 0, 30, 30)
    cfg = AugmentConfig(alpha=0.5, clamp_to_image=False)
    assert augment_box(box, cfg, Rng(5), (64, 64)) == jitter_box(box, cfg, Rng(5))


# ── patch points ──────────────────────────────────────────────────


def _cells(width, height, patch):
    return [
        (x0, y0, min(x0 + patch, width), min(y0 + patch, height))
        for y0 in range(0, height, patch)
        for x0 in range(0, width, patch)
    ]


def test_patch_points_single_cell():
    seg = _seg(np.zeros((32, 32)))
    points = sample_patch_points(seg, 32, Rng(0))
    assert len(points) == 1
    point, name = points[0]
    assert point.inside(32, 32)
    assert name == "water"


@pytest.mark.parametrize("size", [64, 50])
def test_patch_points_one_per_cell(size):
    class_ids = np.zeros((size, size))
    class_ids[:, size // 2:] = 1
    seg = _seg(class_ids)
    cells = _cells(size, size, 32)
    for seed in range(100):
        points = sample_patch_points(seg, 32, Rng(seed))
        assert len(points) == len(cells) == 4
        for (point, name), (x0, y0, x1, y1) in zip(points, cells):
            assert x0 <= point.x < x1 and y0 <= point.y < y1
            assert name == seg.legend[seg.class_at(int(point.x), int(point.y))]


def test_patch_points_drop_ignore_pixels():
    seg = _seg(np.full((64, 64), 255))
    assert sample_patch_points(seg, 32, Rng(0)) == []


def test_patch_points_empty_legend_with_labels():
    seg = _seg(np.zeros((8, 8)), legend={})
    with pytest.raises(InconsistentLegendError):
        sample_patch_points(seg, 4, Rng(0))


def test_patch_points_reject_zero_patch():
    with pytest.raises(InvalidArgumentError):
        sample_patch_points(_seg(np.zeros((8, 8))), 0, Rng(0))


# ── mask points ───────────────────────────────────────────────────


def test_mask_points_singleton():
    assert sample_mask_points({(4, 7)}, 1, Rng(0)) == [PointPrompt(4, 7)]


def test_mask_points_distinct_members():
    mask = np.ones((10, 10), dtype=bool)
    points = sample_mask_points(mask, 5, Rng(3))
    assert len({(p.x, p.y) for p in points}) == 5
    assert all(p.inside(10, 10) for p in points)


def test_mask_points_small_mask_repeats():
    points = sample_mask_points({(1, 1), (2, 2)}, 5, Rng(0))
    assert len(points) == 5
    assert {(p.x, p.y) for p in points} <= {(1, 1), (2, 2)}


def test_mask_points_uniform():
    mask = np.ones((10, 10), dtype=bool)
    rng = Rng(42)
    counts = np.zeros((10, 10))
    trials = 50_000
    for _ in range(trials):
        for p in sample_mask_points(mask, 3, rng):
            counts[int(p.y), int(p.x)] += 1
    expected = trials * 3 / 100
    assert np.all(np.abs(counts - expected) < 0.1 * expected)


def test_mask_points_empty_mask():
    with pytest.raises(InvalidArgumentError):
        sample_mask_points(np.zeros((4, 4), dtype=bool), 1, Rng(0))


def test_class_points_k_per_class():
    class_ids = np.zeros((16, 16))
    class_ids[8:, :] = 1
    class_ids[0, 0] = 255
    seg = _seg(class_ids)
    points = sample_class_points(seg, 3, Rng(0))
    assert [name for _, name in points] == ["water"] * 3 + ["farmland"] * 3
    for point, name in points:
        assert seg.name_at(int(point.x), int(point.y)) == name


# ── free-form reduction ───────────────────────────────────────────


def test_freeform_single_vertex():
    box = freeform_to_box(FreeFormPrompt(((5, 5),)), (100, 100))
    assert box.as_list() == [5, 5, 1, 1]


def test_freeform_bounding_box():
    box = freeform_to_box(FreeFormPrompt(((2, 3), (10, 7), (6, 1))), (100, 100))
    assert box.as_list() == [2, 1, 8, 6]


def test_freeform_clamped_to_image():
    box = freeform_to_box(FreeFormPrompt(((-10, 5), (120, 40))), (100, 50))
    assert box.x >= 0 and box.x2 <= 100
    assert box.y >= 0 and box.y2 <= 50


def test_freeform_on_far_edge_keeps_unit_size():
    box = freeform_to_box(FreeFormPrompt(((99.5, 5.0),)), (100, 100))
    assert box.as_list() == [99, 5, 1, 1]
    assert not box.degenerate
    corner = freeform_to_box(FreeFormPrompt(((99.5, 99.9), (99.8, 99.6))), (100, 100))
    assert corner.as_list() == [99, 99, 1, 1]


def test_freeform_boxes_never_shrink_below_one_pixel():
    rng = np.random.default_rng(11)
    for _ in range(200):
        vertices = tuple(map(tuple, rng.uniform(-5, 105, size=(int(rng.integers(1, 5)), 2))))
        box = freeform_to_box(FreeFormPrompt(vertices), (100, 100))
        if box.degenerate:
            continue
        assert box.w >= 1 - 1e-9 and box.h >= 1 - 1e-9
        assert box.x >= 0 and box.x2 <= 100
        assert box.y >= 0 and box.y2 <= 100


def test_infer_box_keeps_mark():
    stroke = VisualPrompt(
        kind=PromptKind.FREE_FORM, payload=FreeFormPrompt(((2, 3), (10, 7))), mark_id=4
    )
    inferred = infer_box(stroke, (100, 100))
    assert inferred.kind is PromptKind.BOX
    assert inferred.mark_id == 4
    assert inferred.payload.as_list() == [2, 3, 8, 4]
