"""
Visual prompt synthesis: box noise augmentation, patch-grid and mask point
sampling, and free-form to box reduction, all driven by a seeded ``Rng``.
"""

from gerdsenai_vprompt.synth.rng import Rng, stable_hash
from gerdsenai_vprompt.synth.prompts import (
    DEFAULT_ALPHA,
    DEFAULT_PATCH_PX,
    AugmentConfig,
    augment_box,
    freeform_to_box,
    infer_box,
    jitter_box,
    sample_class_points,
    sample_mask_points,
    sample_patch_points,
)

__all__ = [
    "Rng",
    "stable_hash",
    "DEFAULT_ALPHA",
    "DEFAULT_PATCH_PX",
    "AugmentConfig",
    "augment_box",
    "freeform_to_box",
    "infer_box",
    "jitter_box",
    "sample_class_points",
    "sample_mask_points",
    "sample_patch_points",
]
