"""
Spatial-aware prompt encoder.

A binary prompt mask is zero-padded to a multiple of the patch size,
cut into patches in row-major order, linearly embedded, then passed
through one self-attention layer and one feed-forward block. One output
row per patch.
"""

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from gerdsenai_vprompt.errors import InvalidArgumentError, ShapeError
from gerdsenai_vprompt.kernel.attention import AttentionParams, attend, attend_backward
from gerdsenai_vprompt.kernel.config import KernelConfig
from gerdsenai_vprompt.kernel.layers import (
    FeedForwardParams,
    feed_forward_backward,
    feed_forward_cached,
)
from gerdsenai_vprompt.kernel.tensor import Tensor2D


@dataclass(frozen=True, eq=False)
class SAEParams:
    w_patch: np.ndarray  # (d_v, patch * patch)
    b_patch: np.ndarray  # (d_v,)
    attn: AttentionParams
    ff: FeedForwardParams

    def __post_init__(self):
        object.__setattr__(self, "w_patch", np.array(self.w_patch, dtype=np.float64))
        object.__setattr__(self, "b_patch", np.array(self.b_patch, dtype=np.float64))
        d_v = self.w_patch.shape[0]
        if self.b_patch.shape != (d_v,):
            raise ShapeError(f"b_patch must be ({d_v},), got {self.b_patch.shape}")
        if self.attn.dim != d_v or self.ff.dim != d_v:
            raise ShapeError("SAE attention and feed-forward must share the patch embedding width")

    def arrays(self) -> Dict[str, np.ndarray]:
        out = {"w_patch": self.w_patch, "b_patch": self.b_patch}
        out.update({f"attn.{k}": v for k, v in self.attn.arrays().items()})
        out.update({f"ff.{k}": v for k, v in self.ff.arrays().items()})
        return out

    def copy(self) -> "SAEParams":
        return SAEParams(self.w_patch.copy(), self.b_patch.copy(), self.attn.copy(), self.ff.copy())

    @classmethod
    def random(cls, rng: np.random.Generator, cfg: KernelConfig) -> "SAEParams":
        fan_in = cfg.patch * cfg.patch
        return cls(
            w_patch=rng.standard_normal((cfg.d_v, fan_in)) / np.sqrt(fan_in),
            b_patch=rng.standard_normal(cfg.d_v) * 0.1,
            attn=AttentionParams.random(rng, cfg.d_v),
            ff=FeedForwardParams.random(rng, cfg.d_v, cfg.d_ff),
        )


def patchify(mask: np.ndarray, patch: int) -> np.ndarray:
    """(n_patches, patch * patch) rows, patches and pixels both row-major."""
    m = np.asarray(mask, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise InvalidArgumentError(f"prompt mask must be a non-empty 2-D raster, got shape {m.shape}")
    if not np.all((m == 0) | (m == 1)):
        raise InvalidArgumentError("prompt mask must be binary")
    rows = -(-m.shape[0] // patch) * patch
    cols = -(-m.shape[1] // patch) * patch
    padded = np.zeros((rows, cols))
    padded[: m.shape[0], : m.shape[1]] = m
    gh, gw = rows // patch, cols // patch
    return padded.reshape(gh, patch, gw, patch).transpose(0, 2, 1, 3).reshape(gh * gw, patch * patch)


def sae_forward(mask: np.ndarray, params: SAEParams, cfg: KernelConfig) -> Tuple[Tensor2D, dict]:
    if params.w_patch.shape[1] != cfg.patch * cfg.patch:
        raise ShapeError(
            f"w_patch expects {params.w_patch.shape[1]} pixels per patch, "
            f"patch size {cfg.patch} gives {cfg.patch * cfg.patch}"
        )
    patches = patchify(mask, cfg.patch)
    e0 = patches @ params.w_patch.T + params.b_patch
    e1, attn_cache = attend(e0, e0, params.attn)
    out, ff_cache = feed_forward_cached(e1, params.ff)
    return out, {"patches": patches, "attn": attn_cache, "ff": ff_cache}


def sae_encode(mask: np.ndarray, params: SAEParams, cfg: KernelConfig) -> Tensor2D:
    return sae_forward(mask, params, cfg)[0]


def sae_backward(cache: dict, d_out: Tensor2D, params: SAEParams) -> Dict[str, np.ndarray]:
    d_e1, ff_grads = feed_forward_backward(cache["ff"], d_out, params.ff)
    dq, dc, attn_grads = attend_backward(cache["attn"], d_e1, params.attn)
    d_e0 = dq + dc
    grads = {"w_patch": d_e0.T @ cache["patches"], "b_patch": d_e0.sum(axis=0)}
    grads.update({f"attn.{k}": v for k, v in attn_grads.items()})
    grads.update({f"ff.{k}": v for k, v in ff_grads.items()})
    return grads
