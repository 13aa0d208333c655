"""
Instruction tokenizer stand-in.

Words are normalized like the text metrics do, then hashed with 64-bit
FNV-1a and reduced modulo the vocabulary size. Ids are stable across
runs and platforms.
"""

from typing import List, Sequence

import numpy as np

from gerdsenai_vprompt.errors import InvalidArgumentError
from gerdsenai_vprompt.kernel.tensor import Tensor2D
from gerdsenai_vprompt.metrics.text import normalize

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & _MASK64
    return h


def tokenize_stub(text: str, vocab_size: int = 1000) -> List[int]:
    if vocab_size < 1:
        raise InvalidArgumentError(f"vocab_size must be >= 1, got {vocab_size}")
    return [fnv1a_64(word.encode("utf-8")) % vocab_size for word in normalize(text)]


def embed_tokens(ids: Sequence[int], table: np.ndarray) -> Tensor2D:
    """Row lookup into a (vocab_size, d_l) embedding matrix."""
    table = np.asarray(table, dtype=np.float64)
    if table.ndim != 2:
        raise InvalidArgumentError(f"embedding matrix must be 2-D, got shape {table.shape}")
    idx = np.asarray(list(ids), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= table.shape[0]):
        raise InvalidArgumentError(f"token id out of range for vocabulary of {table.shape[0]}")
    return table[idx].reshape(len(idx), table.shape[1])
