"""
Deterministic, splittable random source.

Every stream is a numpy ``PCG64`` generator. PCG64 output is specified
bit-for-bit, so a seed produces the same draws on every platform.
Child streams for batch items use ``seed XOR blake2b64(item_key)`` so
results do not depend on worker scheduling.
"""

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def stable_hash(key: str) -> int:
    """64-bit blake2b digest of *key* as an unsigned int."""
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


class Rng:
    """Seeded generator with a per-item derivation rule."""

    def __init__(self, seed: int = 0):
        self.seed = int(seed) & MASK64
        self.generator = np.random.Generator(np.random.PCG64(self.seed))

    def derive(self, key: str) -> "Rng":
        """Fresh child stream for *key*, independent of this stream's position."""
        return Rng(self.seed ^ stable_hash(key))

    def normal(self, size: int) -> np.ndarray:
        return self.generator.standard_normal(size)

    def integer(self, high: int) -> int:
        """Uniform integer in [0, high)."""
        return int(self.generator.integers(0, high))

    def choice(self, n: int, size: int, replace: bool) -> np.ndarray:
        return self.generator.choice(n, size=size, replace=replace)

    def __repr__(self):
        return f"Rng(seed={self.seed})"
