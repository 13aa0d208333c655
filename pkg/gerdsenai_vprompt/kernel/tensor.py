"""
2-D float64 tensors for the fusion kernel.

Tensors are plain ``numpy`` arrays of shape (rows, cols). JSON fixtures
use ``{"rows", "cols", "data"}`` with ``data`` in row-major order.
"""

import json
from typing import Any, Dict, Sequence, Union

import numpy as np

from gerdsenai_vprompt.errors import InvalidArgumentError, ShapeError

Tensor2D = np.ndarray


def as_tensor(value: Any, name: str = "tensor") -> Tensor2D:
    """Copy *value* into a finite float64 (rows, cols) array."""
    arr = np.array(value, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} has non-finite values")
    return arr


def require_cols(x: Tensor2D, cols: int, name: str) -> None:
    if x.ndim != 2 or x.shape[1] != cols:
        raise ShapeError(f"{name} must have {cols} columns, got shape {x.shape}")


def concat_views(views: Sequence[Tensor2D]) -> Tensor2D:
    """Stack per-view feature blocks row-wise, in input order."""
    if not views:
        raise InvalidArgumentError("concat_views needs at least one view")
    blocks = [as_tensor(v, f"view {i}") for i, v in enumerate(views)]
    cols = blocks[0].shape[1]
    for i, b in enumerate(blocks[1:], start=1):
        require_cols(b, cols, f"view {i}")
    return np.vstack(blocks)


def tensor_to_dict(x: Tensor2D) -> Dict[str, Any]:
    """``{"rows", "cols", "data"}`` with *data* in row-major order."""
    x = as_tensor(x)
    return {"rows": int(x.shape[0]), "cols": int(x.shape[1]), "data": x.ravel().tolist()}


def tensor_from_dict(data: Dict[str, Any]) -> Tensor2D:
    try:
        rows, cols, values = int(data["rows"]), int(data["cols"]), data["data"]
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidArgumentError(f"tensor JSON needs rows, cols and data: {e}") from e
    if rows < 0 or cols < 0 or len(values) != rows * cols:
        raise ShapeError(f"tensor JSON has {len(values)} values for {rows}x{cols}")
    return as_tensor(np.array(values, dtype=np.float64).reshape(rows, cols))


def tensor_to_json(x: Tensor2D) -> str:
    return json.dumps(tensor_to_dict(x))


def tensor_from_json(text: Union[str, bytes]) -> Tensor2D:
    return tensor_from_dict(json.loads(text))
