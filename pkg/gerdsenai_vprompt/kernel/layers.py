"""
Feed-forward block and the vision-to-language projection.
"""

from dataclasses import dataclass, fields
from typing import Dict, Tuple

import numpy as np
from scipy.special import erf

from gerdsenai_vprompt.errors import ShapeError
from gerdsenai_vprompt.kernel.tensor import Tensor2D, require_cols

_SQRT2 = np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def gelu(x: np.ndarray) -> np.ndarray:
    """Exact Gaussian-error linear unit, x * Phi(x)."""
    return 0.5 * x * (1.0 + erf(x / _SQRT2))


def gelu_grad(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + erf(x / _SQRT2)) + x * _INV_SQRT_2PI * np.exp(-0.5 * x * x)


@dataclass(frozen=True, eq=False)
class FeedForwardParams:
    """``gelu(X @ w1.T + b1) @ w2.T + b2`` with w1 (d_ff, d), w2 (d, d_ff)."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, np.array(getattr(self, f.name), dtype=np.float64))
        if self.w1.ndim != 2:
            raise ShapeError(f"w1 must be 2-D, got {self.w1.shape}")
        d_ff, d = self.w1.shape
        expected = {"b1": (d_ff,), "w2": (d, d_ff), "b2": (d,)}
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ShapeError(f"{name} must be {shape}, got {getattr(self, name).shape}")

    @property
    def dim(self) -> int:
        return self.w1.shape[1]

    def arrays(self) -> Dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def copy(self) -> "FeedForwardParams":
        return FeedForwardParams(**{k: v.copy() for k, v in self.arrays().items()})

    @classmethod
    def random(cls, rng: np.random.Generator, d: int, d_ff: int) -> "FeedForwardParams":
        return cls(
            w1=rng.standard_normal((d_ff, d)) / np.sqrt(d),
            b1=rng.standard_normal(d_ff) * 0.1,
            w2=rng.standard_normal((d, d_ff)) / np.sqrt(d_ff),
            b2=rng.standard_normal(d) * 0.1,
        )


def feed_forward_cached(x: Tensor2D, p: FeedForwardParams) -> Tuple[Tensor2D, dict]:
    require_cols(x, p.dim, "feed-forward input")
    h = x @ p.w1.T + p.b1
    g = gelu(h)
    return g @ p.w2.T + p.b2, {"x": x, "h": h, "g": g}


def feed_forward(x: Tensor2D, p: FeedForwardParams) -> Tensor2D:
    return feed_forward_cached(x, p)[0]


def feed_forward_backward(
    cache: dict, d_out: Tensor2D, p: FeedForwardParams
) -> Tuple[Tensor2D, Dict[str, np.ndarray]]:
    x, h, g = cache["x"], cache["h"], cache["g"]
    dg = d_out @ p.w2
    dh = dg * gelu_grad(h)
    grads = {
        "w1": dh.T @ x,
        "b1": dh.sum(axis=0),
        "w2": d_out.T @ g,
        "b2": d_out.sum(axis=0),
    }
    return dh @ p.w1, grads


@dataclass(frozen=True, eq=False)
class Projection:
    """Affine map ``Y = H @ w + b`` with w (d_v, d_l)."""

    w: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", np.array(self.w, dtype=np.float64))
        object.__setattr__(self, "b", np.array(self.b, dtype=np.float64))
        if self.w.ndim != 2 or self.b.shape != (self.w.shape[1],):
            raise ShapeError(f"projection w {self.w.shape} and b {self.b.shape} do not match")

    @property
    def d_in(self) -> int:
        return self.w.shape[0]

    @property
    def d_out(self) -> int:
        return self.w.shape[1]

    def arrays(self) -> Dict[str, np.ndarray]:
        return {"w": self.w, "b": self.b}

    def copy(self) -> "Projection":
        return Projection(self.w.copy(), self.b.copy())

    @classmethod
    def random(cls, rng: np.random.Generator, d_v: int, d_l: int) -> "Projection":
        return cls(rng.standard_normal((d_v, d_l)) / np.sqrt(d_v), rng.standard_normal(d_l) * 0.1)


def project_vl(h: Tensor2D, proj: Projection) -> Tensor2D:
    """Map fused visual rows (d_v) into the language width (d_l)."""
    require_cols(h, proj.d_in, "projection input")
    return h @ proj.w + proj.b


def project_backward(
    h: Tensor2D, d_out: Tensor2D, proj: Projection
) -> Tuple[Tensor2D, Dict[str, np.ndarray]]:
    return d_out @ proj.w.T, {"w": h.T @ d_out, "b": d_out.sum(axis=0)}
