"""
Worker-pool helpers for batch commands.

Each item runs through ``run_item`` and comes back as ``(success, value)``
where *value* is the result or an error message, so one bad item never
aborts a batch. ``run_items`` keeps results in input order regardless
of which worker finishes first.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, List, Tuple

import psutil

from gerdsenai_vprompt.errors import VPromptError

logger = logging.getLogger(__name__)

ItemResult = Tuple[bool, Any]


def default_threads() -> int:
    """Physical core count, falling back to 1 when it cannot be read."""
    return psutil.cpu_count(logical=False) or 1


def run_item(func: Callable[[Any], Any], item: Any) -> ItemResult:
    """Run *func* on one item and return (success, result-or-message)."""
    try:
        return True, func(item)
    except (VPromptError, OSError, ValueError) as e:
        return False, str(e)


def run_items(
    func: Callable[[Any], Any], items: Iterable[Any], threads: int = 1
) -> List[ItemResult]:
    """Map *func* over *items* on a thread pool, results in input order.

    Args:
        func: Called once per item; domain, OS and value errors are caught.
        items: Work items.
        threads: Pool size; 1 runs inline.

    Returns:
        One (ok, value_or_message) pair per item.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [run_item(func, item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda item: run_item(func, item), items))


def summarize(results: List[ItemResult]) -> Tuple[int, List[str]]:
    """Count successes and collect failure messages."""
    failures = [value for ok, value in results if not ok]
    for message in failures:
        logger.warning("%s", message)
    return len(results) - len(failures), failures
