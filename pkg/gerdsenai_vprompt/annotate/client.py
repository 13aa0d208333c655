"""
Annotation provider clients.

Supports a deterministic mock and an HTTP provider.

HTTP contract:
    POST <endpoint>  {"image": <base64 PNG>, "prompt": <text>}
    200              {"text": <annotation>}
"""

import asyncio
import base64
import logging
from abc import ABC, abstractmethod
from typing import Optional

import aiohttp

from gerdsenai_vprompt.annotate.requests import AnnotationRequest
from gerdsenai_vprompt.errors import InvalidArgumentError, ProviderError

logger = logging.getLogger(__name__)

DEFAULT_ATTEMPTS = 3
DEFAULT_BACKOFF_S = 0.5
DEFAULT_TIMEOUT_S = 30.0


class AnnotationProvider(ABC):
    """Turns an annotation request into text."""

    name = "provider"
    # Deterministic providers report zero latency so runs are reproducible.
    deterministic = False

    @abstractmethod
    async def complete(self, request: AnnotationRequest) -> str:
        ...


_OPENERS = (
    "",
    "In this scene, ",
    "Looking at the marked image, ",
    "From above, ",
)


class MockProvider(AnnotationProvider):
    """Offline provider whose text is a pure function of the request."""

    name = "mock"
    deterministic = True

    async def complete(self, request: AnnotationRequest) -> str:
        digest = request.digest()
        opener = _OPENERS[digest[0] % len(_OPENERS)]
        sentences = [f"a {category} is marked as Mark {mid}." for mid, category in request.marks]
        text = " ".join(s[0].upper() + s[1:] for s in sentences)
        if opener:
            text = opener + text[0].lower() + text[1:]
        return f"{text} (ref {digest.hex()[:8]})"


def _transient(status: int) -> bool:
    return status == 429 or status >= 500


class HttpProvider(AnnotationProvider):
    """JSON-over-HTTP provider with exponential backoff.

    Args:
        endpoint: URL that accepts the POST body
        token: optional bearer token
        timeout_s: per-attempt timeout
        attempts: total tries for transient failures (5xx, 429, transport)
        backoff_s: delay before the second try; doubles each retry
    """

    name = "http"

    def __init__(
        self,
        endpoint: str,
        token: Optional[str] = None,
        timeout_s: float = DEFAULT_TIMEOUT_S,
        attempts: int = DEFAULT_ATTEMPTS,
        backoff_s: float = DEFAULT_BACKOFF_S,
    ):
        if not endpoint:
            raise InvalidArgumentError("HTTP provider needs an endpoint (set ANNOTATE_ENDPOINT)")
        if attempts < 1:
            raise InvalidArgumentError(f"attempts must be >= 1, got {attempts}")
        self.endpoint = endpoint
        self.token = token
        self.timeout_s = timeout_s
        self.attempts = attempts
        self.backoff_s = backoff_s

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        return headers

    async def complete(self, request: AnnotationRequest) -> str:
        body = {
            "image": base64.b64encode(request.overlay_png).decode("ascii"),
            "prompt": request.prompt_text,
        }
        timeout = aiohttp.ClientTimeout(total=self.timeout_s)
        last_error = "no attempt made"

        async with aiohttp.ClientSession(headers=self._headers(), timeout=timeout) as session:
            for attempt in range(1, self.attempts + 1):
                try:
                    async with session.post(self.endpoint, json=body) as resp:
                        if resp.status == 200:
                            try:
                                data = await resp.json(content_type=None)
                            except (ValueError, aiohttp.ContentTypeError) as e:
                                raise ProviderError(
                                    f"{request.triple_id}: response is not JSON ({e})",
                                    attempts=attempt,
                                ) from e
                            if not isinstance(data, dict) or not isinstance(data.get("text"), str):
                                raise ProviderError(
                                    f"{request.triple_id}: response has no 'text' string",
                                    attempts=attempt,
                                )
                            return data["text"]
                        last_error = f"HTTP {resp.status}"
                        if not _transient(resp.status):
                            raise ProviderError(
                                f"{request.triple_id}: provider rejected request ({last_error})",
                                attempts=attempt,
                            )
                except (aiohttp.ClientError, asyncio.TimeoutError) as e:
                    last_error = f"{type(e).__name__}: {e}"

                if attempt < self.attempts:
                    delay = self.backoff_s * (2 ** (attempt - 1))
                    logger.warning(
                        "%s: attempt %d/%d failed (%s), retrying in %.2fs",
                        request.triple_id, attempt, self.attempts, last_error, delay,
                    )
                    await asyncio.sleep(delay)

        raise ProviderError(f"{request.triple_id}: {last_error}", attempts=self.attempts)


def make_provider(
    kind: str,
    endpoint: Optional[str] = None,
    token: Optional[str] = None,
    timeout_s: float = DEFAULT_TIMEOUT_S,
    attempts: int = DEFAULT_ATTEMPTS,
) -> AnnotationProvider:
    if kind == "mock":
        return MockProvider()
    if kind == "http":
        return HttpProvider(endpoint or "", token=token, timeout_s=timeout_s, attempts=attempts)
    raise InvalidArgumentError(f"unknown provider {kind!r}; choose mock or http")
