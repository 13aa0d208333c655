"""
Exception hierarchy for VPrompt.

Pure operations raise one of these; batch layers catch ``VPromptError``
per item and turn it into an ``(ok, message)`` pair.
"""

from typing import Iterable, Optional


class VPromptError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(VPromptError, ValueError):
    """An argument violates an operation's precondition."""


class ShapeError(InvalidArgumentError):
    """Tensor or matrix dimensions do not line up."""


class InconsistentLegendError(VPromptError):
    """A segmentation class id has no entry in the legend."""


class ParseError(VPromptError):
    """Input bytes could not be parsed.

    Carries either a byte ``offset`` (JSON documents) or a 1-based ``line``
    (JSONL / text formats).
    """

    def __init__(
        self,
        message: str,
        offset: Optional[int] = None,
        line: Optional[int] = None,
        path: Optional[str] = None,
    ):
        where = []
        if path:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"offset {offset}")
        super().__init__(f"{': '.join(where)}: {message}" if where else message)
        self.offset = offset
        self.line = line
        self.path = path


class SchemaError(VPromptError):
    """A parsed document is missing a field or has the wrong type."""

    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field_path = field_path


class MissingTemplateError(VPromptError, KeyError):
    """No instruction template is registered for a task."""

    def __str__(self):
        return str(self.args[0]) if self.args else "missing template"


class TripleInvariantError(InvalidArgumentError):
    """A Triple failed validation."""


class DecodeError(VPromptError):
    """An image could not be decoded."""

    def __init__(self, path: str, message: str = "cannot decode image"):
        super().__init__(f"{path}: {message}")
        self.path = path


class SlotError(VPromptError):
    """An annotation template slot could not be filled."""

    def __init__(
        self,
        message: str,
        slots: Iterable[str] = (),
        mark_id: Optional[int] = None,
    ):
        super().__init__(message)
        self.slots = list(slots)
        self.mark_id = mark_id


class ProviderError(VPromptError):
    """The annotation provider failed after all retry attempts."""

    def __init__(self, message: str, attempts: int):
        super().__init__(f"{message} (after {attempts} attempt(s))")
        self.attempts = attempts


class EmptyAnnotationError(VPromptError):
    """The annotation provider returned empty text."""


class EmbeddingFormatError(ParseError):
    """An embedding table line is malformed."""


class DegenerateCorpusError(InvalidArgumentError):
    """A corpus-level metric needs more items than were given."""


class MetricRangeError(VPromptError):
    """A metric produced a value outside its documented range."""


class UsageError(VPromptError):
    """A command was invoked with an invalid combination of options."""
