"""
Single-head scaled dot-product attention with an output projection.

Weights are stored (d_out, d_in), so ``Q = X @ w_q.T + b_q``. There are
no positional terms: self-attention is permutation-equivariant and
cross-attention ignores the order of its context rows.
"""

from dataclasses import dataclass, fields
from typing import Dict, Tuple

import numpy as np

from gerdsenai_vprompt.errors import ShapeError
from gerdsenai_vprompt.kernel.tensor import Tensor2D, require_cols


@dataclass(frozen=True, eq=False)
class AttentionParams:
    w_q: np.ndarray
    w_k: np.ndarray
    w_v: np.ndarray
    b_q: np.ndarray
    b_k: np.ndarray
    b_v: np.ndarray
    w_o: np.ndarray
    b_o: np.ndarray

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, np.array(getattr(self, f.name), dtype=np.float64))
        d = self.w_q.shape[1] if self.w_q.ndim == 2 else -1
        for name in ("w_q", "w_k", "w_v", "w_o"):
            if getattr(self, name).shape != (d, d):
                raise ShapeError(f"{name} must be ({d}, {d}), got {getattr(self, name).shape}")
        for name in ("b_q", "b_k", "b_v", "b_o"):
            if getattr(self, name).shape != (d,):
                raise ShapeError(f"{name} must be ({d},), got {getattr(self, name).shape}")

    @property
    def dim(self) -> int:
        return self.w_q.shape[0]

    def arrays(self) -> Dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def copy(self) -> "AttentionParams":
        return AttentionParams(**{k: v.copy() for k, v in self.arrays().items()})

    @classmethod
    def random(cls, rng: np.random.Generator, d: int) -> "AttentionParams":
        scale = 1.0 / np.sqrt(d)
        mats = {n: rng.standard_normal((d, d)) * scale for n in ("w_q", "w_k", "w_v", "w_o")}
        vecs = {n: rng.standard_normal(d) * 0.1 for n in ("b_q", "b_k", "b_v", "b_o")}
        return cls(**mats, **vecs)


def softmax(s: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted by the row max."""
    z = s - s.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def attend(queries: Tensor2D, context: Tensor2D, p: AttentionParams) -> Tuple[Tensor2D, dict]:
    """Forward pass; returns the output and the cache for :func:`attend_backward`."""
    d = p.dim
    require_cols(queries, d, "queries")
    require_cols(context, d, "context")
    if context.shape[0] == 0:
        raise ShapeError("attention context has no rows")
    q = queries @ p.w_q.T + p.b_q
    k = context @ p.w_k.T + p.b_k
    v = context @ p.w_v.T + p.b_v
    a = softmax(q @ k.T / np.sqrt(d))
    z = a @ v
    out = z @ p.w_o.T + p.b_o
    cache = {"xq": queries, "xc": context, "q": q, "k": k, "v": v, "a": a, "z": z}
    return out, cache


def attend_backward(
    cache: dict, d_out: Tensor2D, p: AttentionParams
) -> Tuple[Tensor2D, Tensor2D, Dict[str, np.ndarray]]:
    """Gradients w.r.t. queries, context and every parameter."""
    xq, xc, q, k, v, a, z = (cache[n] for n in ("xq", "xc", "q", "k", "v", "a", "z"))
    scale = np.sqrt(p.dim)

    grads = {"w_o": d_out.T @ z, "b_o": d_out.sum(axis=0)}
    dz = d_out @ p.w_o
    da = dz @ v.T
    dv = a.T @ dz
    ds = a * (da - np.sum(a * da, axis=1, keepdims=True))
    dq = ds @ k / scale
    dk = ds.T @ q / scale

    grads.update(
        w_q=dq.T @ xq, b_q=dq.sum(axis=0),
        w_k=dk.T @ xc, b_k=dk.sum(axis=0),
        w_v=dv.T @ xc, b_v=dv.sum(axis=0),
    )
    d_queries = dq @ p.w_q
    d_context = dk @ p.w_k + dv @ p.w_v
    return d_queries, d_context, grads


def self_attention(x: Tensor2D, p: AttentionParams) -> Tensor2D:
    """Scaled dot-product attention of the rows of *x* over themselves.

    Args:
        x: (n, d) input rows.
        p: Square d x d projections and biases.

    Returns:
        (n, d) output. Permuting the rows of *x* permutes the output
        the same way.
    """
    return attend(x, x, p)[0]


def cross_attention(queries: Tensor2D, context: Tensor2D, p: AttentionParams) -> Tensor2D:
    """Queries from *queries*; keys and values from *context*.

    Args:
        queries: (m, d) rows that ask.
        context: (n, d) rows attended over; their order does not matter.
        p: Square d x d projections and biases.

    Returns:
        (m, d), one row per query.
    """
    return attend(queries, context, p)[0]
