"""
Word-embedding tables for the semantic metrics.

File format: one ``token v1 ... vD`` line per word, single spaces.
Tokens are lowercased on load; a repeated token keeps its last vector.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO, Dict, Iterable, Optional, Union

import numpy as np

from gerdsenai_vprompt.errors import EmbeddingFormatError, InvalidArgumentError
from gerdsenai_vprompt.metrics.text import MetricConfig

logger = logging.getLogger(__name__)


class OovPolicy(str, Enum):
    ZERO_VECTOR = "zero_vector"
    SKIP_TOKEN = "skip_token"


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    dim: int
    vectors: Dict[str, np.ndarray]
    oov_policy: OovPolicy = OovPolicy.ZERO_VECTOR

    def __post_init__(self):
        object.__setattr__(self, "oov_policy", OovPolicy(self.oov_policy))
        frozen = {}
        for token, vec in self.vectors.items():
            arr = np.array(vec, dtype=np.float64)
            if arr.shape != (self.dim,):
                raise InvalidArgumentError(
                    f"vector for {token!r} has shape {arr.shape}, expected ({self.dim},)"
                )
            if not np.all(np.isfinite(arr)):
                raise InvalidArgumentError(f"vector for {token!r} is not finite")
            arr.setflags(write=False)
            frozen[token.lower()] = arr
        object.__setattr__(self, "vectors", frozen)

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def lookup(self, token: str) -> Optional[np.ndarray]:
        """Vector for *token*; OOV gives zeros or None per the policy."""
        vec = self.vectors.get(token)
        if vec is not None:
            return vec
        if self.oov_policy is OovPolicy.ZERO_VECTOR:
            return np.zeros(self.dim)
        return None

    def with_policy(self, policy: Union[str, OovPolicy]) -> "EmbeddingTable":
        return EmbeddingTable(self.dim, dict(self.vectors), OovPolicy(policy))


def _parse_lines(lines: Iterable[str], path: Optional[str], policy) -> EmbeddingTable:
    vectors: Dict[str, np.ndarray] = {}
    dim = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        parts = line.split(" ")
        token = parts[0].lower()
        try:
            vec = np.array([float(v) for v in parts[1:]], dtype=np.float64)
        except ValueError as e:
            raise EmbeddingFormatError(f"bad number: {e}", line=lineno, path=path) from e
        if vec.size == 0:
            raise EmbeddingFormatError(f"token {token!r} has no values", line=lineno, path=path)
        if dim is None:
            dim = vec.size
        elif vec.size != dim:
            raise EmbeddingFormatError(
                f"token {token!r} has {vec.size} values, expected {dim}", line=lineno, path=path
            )
        if not np.all(np.isfinite(vec)):
            raise EmbeddingFormatError(f"token {token!r} has non-finite values", line=lineno, path=path)
        if token in vectors:
            logger.warning("Duplicate embedding for %r at line %d, keeping the last one", token, lineno)
        vectors[token] = vec
    if dim is None:
        raise EmbeddingFormatError("no embedding vectors found", path=path)
    return EmbeddingTable(dim=dim, vectors=vectors, oov_policy=policy)


def load_embeddings(
    source: Union[str, Path, IO[str]],
    oov_policy: Union[str, OovPolicy] = OovPolicy.ZERO_VECTOR,
) -> EmbeddingTable:
    """Load a text embedding table from a path or an open text stream."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as f:
            return _parse_lines(f, str(source), oov_policy)
    return _parse_lines(source, None, oov_policy)


def sentence_embedding(
    text: str, table: EmbeddingTable, cfg: Optional[MetricConfig] = None
) -> np.ndarray:
    """L2-normalized mean of the in-vocabulary token vectors; zeros if none embed."""
    cfg = cfg or MetricConfig()
    known = [table.vectors[t] for t in cfg.tokens(text) if t in table.vectors]
    if not known:
        return np.zeros(table.dim)
    mean = np.mean(known, axis=0)
    norm = np.linalg.norm(mean)
    if norm == 0.0:
        return np.zeros(table.dim)
    return mean / norm
