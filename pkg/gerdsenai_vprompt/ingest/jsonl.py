"""
Triple JSONL I/O: one UTF-8 JSON object per line, "\\n" separated.

Floats are written with Python's shortest round-trip repr, so
read(write(x)) reproduces every coordinate exactly.
"""

import io
import json
import logging
from pathlib import Path
from typing import IO, Iterable, List, Union

from gerdsenai_vprompt.core.model import Triple
from gerdsenai_vprompt.errors import ParseError, VPromptError

logger = logging.getLogger(__name__)

Sink = Union[str, Path, IO[str]]


def dumps_triple(triple: Triple) -> str:
    """One JSONL line for *triple*, without the newline.

    Raises:
        TripleInvariantError: if the triple fails validation.
    """
    return json.dumps(triple.validate().to_dict(), ensure_ascii=False)


def write_triples(triples: Iterable[Triple], sink: Sink) -> int:
    """Validate and write triples; returns the number written."""
    if isinstance(sink, (str, Path)):
        Path(sink).parent.mkdir(parents=True, exist_ok=True)
        with open(sink, "w", encoding="utf-8", newline="\n") as f:
            return write_triples(triples, f)
    count = 0
    for triple in triples:
        sink.write(dumps_triple(triple) + "\n")
        count += 1
    return count


def read_triples(source: Sink, strict: bool = True) -> List[Triple]:
    """Read a triple JSONL file.

    Strict mode raises on the first bad line; lenient mode logs a warning
    with the line number and skips it.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as f:
            return _read_lines(f, strict, str(source))
    return _read_lines(source, strict, getattr(source, "name", None))


def loads_triples(text: str, strict: bool = True) -> List[Triple]:
    return _read_lines(io.StringIO(text), strict, None)


def _read_lines(lines: IO[str], strict: bool, path) -> List[Triple]:
    triples = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            triples.append(Triple.from_dict(json.loads(line)).validate())
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, VPromptError) as e:
            error = ParseError(f"bad triple record: {e}", line=line_no, path=path)
            if strict:
                raise error from None
            logger.warning("%s, skipped", error)
    return triples
