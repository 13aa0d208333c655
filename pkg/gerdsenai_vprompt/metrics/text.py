"""
Text normalization shared by every metric.

Rules: lowercase, every non-alphanumeric character becomes a space,
split on whitespace, then drop stopwords if any are configured.
"""

import re
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Optional

from gerdsenai_vprompt.errors import InvalidArgumentError, MetricRangeError

DEFAULT_TAU = 0.5

_NON_WORD_RE = re.compile(r"[^0-9a-z]+")

# float slack allowed before a range check fails
RANGE_EPS = 1e-9


def normalize(text: str, stopwords: Optional[Iterable[str]] = None) -> List[str]:
    tokens = _NON_WORD_RE.sub(" ", text.lower()).split()
    if stopwords:
        stop = set(stopwords)
        tokens = [t for t in tokens if t not in stop]
    return tokens


@dataclass(frozen=True)
class MetricConfig:
    tau: float = DEFAULT_TAU
    stopwords: FrozenSet[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise InvalidArgumentError(f"tau must be in (0, 1), got {self.tau}")
        object.__setattr__(self, "stopwords", frozenset(w.lower() for w in self.stopwords))

    def tokens(self, text: str) -> List[str]:
        return normalize(text, self.stopwords)


def check_range(name: str, value: float, low: Optional[float], high: Optional[float]) -> float:
    """Clip float slack and reject anything really outside [low, high]."""
    if value != value:
        raise MetricRangeError(f"{name} is NaN")
    if low is not None:
        if value < low - RANGE_EPS:
            raise MetricRangeError(f"{name} = {value} is below {low}")
        value = max(value, low)
    if high is not None:
        if value > high + RANGE_EPS:
            raise MetricRangeError(f"{name} = {value} is above {high}")
        value = min(value, high)
    return float(value)
