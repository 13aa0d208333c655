"""
Numeric reference of the vision / prompt fusion math.

Double-precision numpy implementations of view concatenation, the
spatial-aware prompt encoder, hybrid self/cross-attention fusion, the
vision-to-language projection and LLM input assembly, with hand-written
backward passes checked against finite differences.
"""

from gerdsenai_vprompt.kernel.attention import (
    AttentionParams,
    attend,
    attend_backward,
    cross_attention,
    self_attention,
    softmax,
)
from gerdsenai_vprompt.kernel.check import (
    GRAD_TOLERANCE,
    INVARIANT_TOLERANCE,
    gradient_errors,
    numeric_gradients,
    run_kernel_check,
)
from gerdsenai_vprompt.kernel.config import KernelConfig
from gerdsenai_vprompt.kernel.fusion import (
    FusionParams,
    assemble_llm_input,
    encode_and_fuse,
    fuse_backward,
    fuse_forward,
    fusion_loss,
    hybrid_fuse,
    init_fusion_params,
)
from gerdsenai_vprompt.kernel.layers import (
    FeedForwardParams,
    Projection,
    feed_forward,
    gelu,
    gelu_grad,
    project_vl,
)
from gerdsenai_vprompt.kernel.sae import SAEParams, patchify, sae_encode
from gerdsenai_vprompt.kernel.tensor import (
    Tensor2D,
    as_tensor,
    concat_views,
    tensor_from_json,
    tensor_to_json,
)
from gerdsenai_vprompt.kernel.tokenizer import embed_tokens, fnv1a_64, tokenize_stub

__all__ = [
    "AttentionParams",
    "FeedForwardParams",
    "FusionParams",
    "GRAD_TOLERANCE",
    "INVARIANT_TOLERANCE",
    "KernelConfig",
    "Projection",
    "SAEParams",
    "Tensor2D",
    "as_tensor",
    "assemble_llm_input",
    "attend",
    "attend_backward",
    "concat_views",
    "cross_attention",
    "embed_tokens",
    "encode_and_fuse",
    "feed_forward",
    "fnv1a_64",
    "fuse_backward",
    "fuse_forward",
    "fusion_loss",
    "gelu",
    "gelu_grad",
    "gradient_errors",
    "hybrid_fuse",
    "init_fusion_params",
    "numeric_gradients",
    "patchify",
    "project_vl",
    "run_kernel_check",
    "sae_encode",
    "self_attention",
    "softmax",
    "tensor_from_json",
    "tensor_to_json",
    "tokenize_stub",
]
