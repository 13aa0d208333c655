"""
Fusion kernel dimensions.
"""

from dataclasses import asdict, dataclass
from typing import Any, Dict

from gerdsenai_vprompt.errors import InvalidArgumentError


@dataclass(frozen=True)
class KernelConfig:
    d_v: int = 8
    d_l: int = 12
    n_views: int = 1
    patch: int = 4
    seed: int = 0
    d_ff: int = 16
    vocab_size: int = 1000
    precision: str = "float64"

    def __post_init__(self):
        for name in ("d_v", "d_l", "n_views", "patch", "d_ff", "vocab_size"):
            if getattr(self, name) < 1:
                raise InvalidArgumentError(f"{name} must be positive, got {getattr(self, name)}")
        if self.seed < 0:
            raise InvalidArgumentError(f"seed must be non-negative, got {self.seed}")
        if self.precision != "float64":
            raise InvalidArgumentError(f"the kernel runs in float64 only, got {self.precision!r}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
