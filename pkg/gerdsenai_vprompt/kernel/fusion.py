"""
Hybrid fusion of image features with an encoded visual prompt.

    V_sa  = self_attention_1(V_img)
    E_ff  = feed_forward(E_prompt)
    H_ca  = cross_attention(queries=E_ff, context=V_sa)
    out   = self_attention_2(H_ca + E_ff)

The prompt stream supplies the queries because H_ca is added to E_ff,
so the output has one row per prompt row. ``project_vl`` maps the
result into the language width and ``assemble_llm_input`` puts it in
front of the instruction embeddings.

The gradient loss is ``upstream * sum(out ** 2)``, taken on the fused
output or, with ``through_projection``, on the projected output.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from gerdsenai_vprompt.errors import InvalidArgumentError
from gerdsenai_vprompt.kernel.attention import AttentionParams, attend, attend_backward
from gerdsenai_vprompt.kernel.config import KernelConfig
from gerdsenai_vprompt.kernel.layers import (
    FeedForwardParams,
    Projection,
    feed_forward_backward,
    feed_forward_cached,
    project_backward,
    project_vl,
)
from gerdsenai_vprompt.kernel.sae import SAEParams, sae_backward, sae_forward
from gerdsenai_vprompt.kernel.tensor import Tensor2D, as_tensor, require_cols
from gerdsenai_vprompt.synth.rng import Rng

_BLOCKS = ("sae", "sa1", "ff", "cross", "sa2", "proj")


@dataclass(frozen=True, eq=False)
class FusionParams:
    sae: SAEParams
    sa1: AttentionParams
    ff: FeedForwardParams
    cross: AttentionParams
    sa2: AttentionParams
    proj: Projection

    def __post_init__(self):
        d_v = self.sa1.dim
        dims = {
            "sae": self.sae.w_patch.shape[0],
            "ff": self.ff.dim,
            "cross": self.cross.dim,
            "sa2": self.sa2.dim,
            "proj": self.proj.d_in,
        }
        bad = {k: v for k, v in dims.items() if v != d_v}
        if bad:
            raise InvalidArgumentError(f"fusion blocks disagree on d_v={d_v}: {bad}")

    @property
    def d_v(self) -> int:
        return self.sa1.dim

    @property
    def d_l(self) -> int:
        return self.proj.d_out

    def arrays(self) -> Dict[str, np.ndarray]:
        """Every parameter array keyed ``block.name``; the arrays are live references."""
        out = {}
        for block in _BLOCKS:
            for name, arr in getattr(self, block).arrays().items():
                out[f"{block}.{name}"] = arr
        return out

    def copy(self) -> "FusionParams":
        return FusionParams(**{b: getattr(self, b).copy() for b in _BLOCKS})


def init_fusion_params(cfg: KernelConfig) -> FusionParams:
    """Random parameters drawn from ``cfg.seed``; no pretrained weights."""
    g = Rng(cfg.seed).derive("fusion-params").generator
    return FusionParams(
        sae=SAEParams.random(g, cfg),
        sa1=AttentionParams.random(g, cfg.d_v),
        ff=FeedForwardParams.random(g, cfg.d_v, cfg.d_ff),
        cross=AttentionParams.random(g, cfg.d_v),
        sa2=AttentionParams.random(g, cfg.d_v),
        proj=Projection.random(g, cfg.d_v, cfg.d_l),
    )


def fuse_forward(v_img: Tensor2D, e_prompt: Tensor2D, params: FusionParams) -> Tuple[Tensor2D, dict]:
    """Forward pass keeping the per-layer caches used by :func:`fuse_backward`."""
    require_cols(v_img, params.d_v, "V_img")
    require_cols(e_prompt, params.d_v, "E_prompt")
    v_sa, c_sa1 = attend(v_img, v_img, params.sa1)
    e_ff, c_ff = feed_forward_cached(e_prompt, params.ff)
    h_ca, c_cross = attend(e_ff, v_sa, params.cross)
    s = h_ca + e_ff
    out, c_sa2 = attend(s, s, params.sa2)
    return out, {"sa1": c_sa1, "ff": c_ff, "cross": c_cross, "sa2": c_sa2}


def hybrid_fuse(v_img: Tensor2D, e_prompt: Tensor2D, params: FusionParams) -> Tensor2D:
    """Fuse prompt features with image features.

    Args:
        v_img: (n, d_v) image tokens, views stacked row-wise.
        e_prompt: (k, d_v) encoded visual prompt rows.
        params: Weights for the four fusion stages.

    Returns:
        (k, d_v); one row per prompt row, independent of image row order.
    """
    return fuse_forward(as_tensor(v_img, "V_img"), as_tensor(e_prompt, "E_prompt"), params)[0]


def encode_and_fuse(
    v_img: Tensor2D, prompt_mask: np.ndarray, params: FusionParams, cfg: KernelConfig
) -> Tensor2D:
    e_prompt, _ = sae_forward(prompt_mask, params.sae, cfg)
    return hybrid_fuse(v_img, e_prompt, params)


def assemble_llm_input(vp_proj: Tensor2D, l_instruct: Tensor2D) -> Tensor2D:
    """Projected prompt rows followed by instruction rows."""
    vp = as_tensor(vp_proj, "VP_proj")
    instr = np.asarray(l_instruct, dtype=np.float64)
    if instr.size == 0:
        return vp.copy()
    instr = as_tensor(instr, "L_instruct")
    require_cols(instr, vp.shape[1], "L_instruct")
    return np.vstack([vp, instr])


def _prompt_stream(
    e_prompt: Optional[Tensor2D],
    prompt_mask: Optional[np.ndarray],
    params: FusionParams,
    cfg: Optional[KernelConfig],
) -> Tuple[Tensor2D, Optional[dict]]:
    if prompt_mask is None:
        if e_prompt is None:
            raise InvalidArgumentError("need either E_prompt or a prompt mask")
        return as_tensor(e_prompt, "E_prompt"), None
    if cfg is None:
        raise InvalidArgumentError("encoding a prompt mask needs a KernelConfig")
    return sae_forward(prompt_mask, params.sae, cfg)


def fusion_loss(
    v_img: Tensor2D,
    e_prompt: Optional[Tensor2D],
    params: FusionParams,
    upstream: float = 1.0,
    through_projection: bool = False,
    prompt_mask: Optional[np.ndarray] = None,
    cfg: Optional[KernelConfig] = None,
) -> float:
    e, _ = _prompt_stream(e_prompt, prompt_mask, params, cfg)
    out, _ = fuse_forward(as_tensor(v_img, "V_img"), e, params)
    if through_projection:
        out = project_vl(out, params.proj)
    return float(upstream * np.sum(out * out))


def fuse_backward(
    v_img: Tensor2D,
    e_prompt: Optional[Tensor2D],
    params: FusionParams,
    upstream: float = 1.0,
    through_projection: bool = False,
    prompt_mask: Optional[np.ndarray] = None,
    cfg: Optional[KernelConfig] = None,
) -> Dict[str, np.ndarray]:
    """Analytic gradients of :func:`fusion_loss`.

    Keys match :meth:`FusionParams.arrays` plus ``input.v_img`` and
    ``input.e_prompt``. Blocks off the loss path (the SAE without a
    mask, the projection without ``through_projection``) get zeros.
    """
    v_img = as_tensor(v_img, "V_img")
    e, sae_cache = _prompt_stream(e_prompt, prompt_mask, params, cfg)
    out, cache = fuse_forward(v_img, e, params)

    grads = {k: np.zeros_like(v) for k, v in params.arrays().items()}
    if through_projection:
        y = project_vl(out, params.proj)
        d_out, g_proj = project_backward(out, 2.0 * upstream * y, params.proj)
        grads.update({f"proj.{k}": v for k, v in g_proj.items()})
    else:
        d_out = 2.0 * upstream * out

    dq2, dc2, g_sa2 = attend_backward(cache["sa2"], d_out, params.sa2)
    d_sum = dq2 + dc2
    dq_c, d_vsa, g_cross = attend_backward(cache["cross"], d_sum, params.cross)
    d_eff = d_sum + dq_c
    d_e, g_ff = feed_forward_backward(cache["ff"], d_eff, params.ff)
    dq1, dc1, g_sa1 = attend_backward(cache["sa1"], d_vsa, params.sa1)

    for block, g in (("sa2", g_sa2), ("cross", g_cross), ("ff", g_ff), ("sa1", g_sa1)):
        grads.update({f"{block}.{k}": v for k, v in g.items()})
    if sae_cache is not None:
        grads.update({f"sae.{k}": v for k, v in sae_backward(sae_cache, d_e, params.sae).items()})
    grads["input.v_img"] = dq1 + dc1
    grads["input.e_prompt"] = d_e
    return grads
