"""
Run annotation requests against a provider with bounded concurrency.
"""

import asyncio
import json
import logging
import time
from pathlib import Path
from typing import IO, Iterable, List, Tuple, Union

from gerdsenai_vprompt.annotate.client import AnnotationProvider
from gerdsenai_vprompt.annotate.requests import AnnotationRequest, AnnotationResult
from gerdsenai_vprompt.errors import EmptyAnnotationError, InvalidArgumentError, VPromptError

logger = logging.getLogger(__name__)

Outcome = Tuple[bool, AnnotationResult]


async def annotate(request: AnnotationRequest, provider: AnnotationProvider) -> AnnotationResult:
    """Send one request; raises ProviderError or EmptyAnnotationError."""
    start = time.perf_counter()
    text = await provider.complete(request)
    elapsed_ms = int((time.perf_counter() - start) * 1000)
    if not text or not text.strip():
        raise EmptyAnnotationError(f"{request.triple_id}: provider {provider.name} returned no text")
    return AnnotationResult(
        triple_id=request.triple_id,
        text=text,
        provider=provider.name,
        latency_ms=0 if provider.deterministic else elapsed_ms,
    )


async def dispatch(
    requests: Iterable[AnnotationRequest],
    provider: AnnotationProvider,
    limit: int = 4,
) -> List[Outcome]:
    """Annotate every request, at most *limit* in flight.

    Returns ``(ok, result)`` pairs sorted by triple id; failed results
    carry the error message.
    """
    if limit < 1:
        raise InvalidArgumentError(f"limit must be >= 1, got {limit}")
    ordered = sorted(requests, key=lambda r: r.triple_id)
    semaphore = asyncio.Semaphore(limit)

    async def _one(request: AnnotationRequest) -> Outcome:
        async with semaphore:
            try:
                return True, await annotate(request, provider)
            except VPromptError as e:
                logger.warning("Annotation failed: %s", e)
                return False, AnnotationResult(
                    triple_id=request.triple_id,
                    text="",
                    provider=provider.name,
                    error=str(e),
                )
            except Exception as e:
                # a broken provider fails its own request, never the batch
                logger.exception("Unexpected provider error for %s", request.triple_id)
                return False, AnnotationResult(
                    triple_id=request.triple_id,
                    text="",
                    provider=provider.name,
                    error=f"{request.triple_id}: {type(e).__name__}: {e}",
                )

    return list(await asyncio.gather(*(_one(r) for r in ordered)))


def run_dispatch(
    requests: Iterable[AnnotationRequest],
    provider: AnnotationProvider,
    limit: int = 4,
) -> List[Outcome]:
    """Blocking wrapper around :func:`dispatch`."""
    return asyncio.run(dispatch(requests, provider, limit))


def write_results(results: Iterable[AnnotationResult], sink: Union[str, Path, IO[str]]) -> int:
    """Write results as JSONL in triple-id order; returns the record count."""
    records = sorted(results, key=lambda r: r.triple_id)
    lines = "".join(
        json.dumps(r.to_dict(), ensure_ascii=False, sort_keys=False) + "\n" for r in records
    )
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(lines, encoding="utf-8")
    else:
        sink.write(lines)
    return len(records)
