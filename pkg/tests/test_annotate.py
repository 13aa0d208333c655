"""Tests for annotation templates, requests, providers and dispatch."""

import asyncio
import dataclasses
import io
import json
import re
import sys
from pathlib import Path

import numpy as np
import pytest
from aiohttp import test_utils, web
from PIL import Image

sys.path.insert(0, str(Path(__file__).parent.parent))
from gerdsenai_vprompt.annotate import (  # noqa: E402
    AnnotationProvider,
    AnnotationRequest,
    AnnotationResult,
    AnnotationTask,
    AnnotationTemplate,
    HttpProvider,
    MockProvider,
    annotate,
    build_request,
    dispatch,
    get_template,
    make_provider,
    mark_categories,
    run_dispatch,
    write_results,
)
from gerdsenai_vprompt.core import (  # noqa: E402
    BBox,
    Modality,
    PromptKind,
    TaskKind,
    Triple,
    VisualPrompt,
    full_image_box,
)
from gerdsenai_vprompt.errors import (  # noqa: E402
    EmptyAnnotationError,
    InvalidArgumentError,
    ProviderError,
    SlotError,
)


def _png(width=64, height=64) -> bytes:
    buf = io.BytesIO()
    Image.new("RGB", (width, height), (90, 90, 90)).save(buf, format="PNG")
    return buf.getvalue()


def _triple(categories, triple_id="t1", task=TaskKind.REFERRING_OBJECT_CLASSIFICATION):
    prompts = [
        VisualPrompt(
            kind=PromptKind.BOX,
            payload=BBox(4 + 12 * (i % 5), 4 + 12 * (i // 5), 10, 10),
            mark_id=i + 1,
        )
        for i in range(len(categories))
    ]
    return Triple(
        id=triple_id,
        image_path="scene.png",
        image_size=(64, 64),
        modality=Modality.OPTICAL,
        prompts=tuple(prompts),
        task=task,
        question=" ".join(p.token for p in prompts),
        answer="\n".join(f"{p.token}: {c}" for p, c in zip(prompts, categories)),
    )


def _request(triple_id, category="ship"):
    return build_request(_triple([category], triple_id), _png(), get_template("brief"))


# ── templates ─────────────────────────────────────────────────────


def test_single_mark_prompt_text():
    request = build_request(_triple(["ship"]), _png(), get_template("brief"))
    assert request.prompt_text.count("ship") == 1
    assert request.prompt_text.count("Mark 1") == 1
    assert request.marks == ((1, "ship"),)
    assert request.overlay_png.startswith(b"\x89PNG")


def test_all_marks_in_prompt_text():
    request = build_request(
        _triple(["ship", "harbor", "bridge"]), _png(), get_template("detailed")
    )
    for mark_id in (1, 2, 3):
        assert f"Mark {mark_id}" in request.prompt_text


def test_prompt_text_names_every_mark_over_hundred_triples():
    g = np.random.default_rng(17)
    categories = ["ship", "harbor", "bridge", "tank", "runway", "storage tank"]
    image = _png()
    for i in range(100):
        picks = g.integers(0, len(categories), size=int(g.integers(1, 13)))
        triple = _triple([categories[int(c)] for c in picks], f"t{i:03d}")
        request = build_request(triple, image, get_template(("brief", "detailed")[i % 2]))
        for mark_id in triple.mark_ids:
            assert re.search(rf"\bMark {mark_id}\b", request.prompt_text), (triple.id, mark_id)


def test_unfilled_slot_is_reported():
    template = AnnotationTemplate(
        task=AnnotationTask.BRIEF_CAPTION,
        role_text="Objects: {marks}.",
        format_text="{task_goal}",
    )
    with pytest.raises(SlotError) as exc:
        build_request(_triple(["ship"]), _png(), template)
    assert exc.value.slots == ["task_goal"]


def test_unknown_slot_rejected():
    with pytest.raises(SlotError) as exc:
        AnnotationTemplate(
            task=AnnotationTask.BRIEF_CAPTION, role_text="{colour}", format_text=""
        )
    assert exc.value.slots == ["colour"]


def test_categories_slot_is_distinct():
    template = AnnotationTemplate(
        task=AnnotationTask.BRIEF_CAPTION,
        role_text="Classes: {categories}.",
        format_text="Marks: {marks}.",
    )
    text = template.render([(1, "ship"), (2, "ship"), (3, "harbor")])
    assert "Classes: ship, harbor." in text
    assert "Marks: Mark 1: ship, Mark 2: ship, Mark 3: harbor." in text


def test_missing_category_names_mark():
    triple = _triple(["ship", "harbor"])
    triple = dataclasses.replace(triple, answer="<Region 1>: ship")
    with pytest.raises(SlotError) as exc:
        mark_categories(triple)
    assert exc.value.mark_id == 2


def test_full_image_mark_gets_scene_category():
    triple = Triple(
        id="scene",
        image_path="scene.png",
        image_size=(64, 64),
        modality=Modality.OPTICAL,
        prompts=(full_image_box(64, 64),),
        task=TaskKind.IMAGE_CAPTION_BRIEF,
        question="<Region 1>\nPlease provide a brief caption.",
        answer="A harbor with ships.",
    )
    assert mark_categories(triple) == ((1, "whole scene"),)


def test_incompatible_task_rejected():
    triple = _triple(["ship"], task=TaskKind.RELATIONSHIP_ANALYSIS)
    with pytest.raises(InvalidArgumentError):
        build_request(triple, _png(), get_template("brief"))


def test_unknown_template_name():
    assert get_template("relationship").task is AnnotationTask.RELATIONSHIP_ANALYSIS
    with pytest.raises(InvalidArgumentError):
        get_template("poem")


# ── providers ─────────────────────────────────────────────────────


def test_mock_is_deterministic():
    request = _request("t1")
    first = asyncio.run(annotate(request, MockProvider()))
    second = asyncio.run(annotate(request, MockProvider()))
    assert first == second
    assert first.latency_ms == 0


def test_mock_mentions_marks():
    result = asyncio.run(annotate(_request("t1", "harbor"), MockProvider()))
    assert "harbor" in result.text
    assert "Mark 1" in result.text


class _EmptyProvider(AnnotationProvider):
    name = "empty"

    async def complete(self, request):
        return "   "


def test_empty_text_is_an_error():
    with pytest.raises(EmptyAnnotationError):
        asyncio.run(annotate(_request("t1"), _EmptyProvider()))


def test_make_provider():
    assert isinstance(make_provider("mock"), MockProvider)
    assert isinstance(make_provider("http", endpoint="http://127.0.0.1:1/x"), HttpProvider)
    with pytest.raises(InvalidArgumentError):
        make_provider("http")
    with pytest.raises(InvalidArgumentError):
        make_provider("carrier-pigeon")


async def _serve(handler, call):
    app = web.Application()
    app.router.add_post("/annotate", handler)
    server = test_utils.TestServer(app)
    await server.start_server()
    try:
        return await call(str(server.make_url("/annotate")))
    finally:
        await server.close()


def test_http_provider_gives_up_after_retries():
    calls = []

    async def failing(request):
        calls.append(await request.json())
        return web.Response(status=500, text="boom")

    async def call(url):
        provider = HttpProvider(url, token="secret", attempts=3, backoff_s=0)
        return await annotate(_request("t1"), provider)

    with pytest.raises(ProviderError) as exc:
        asyncio.run(_serve(failing, call))
    assert exc.value.attempts == 3
    assert "HTTP 500" in str(exc.value)
    assert len(calls) == 3
    assert set(calls[0]) == {"image", "prompt"}


def test_http_provider_returns_text():
    seen = {}

    async def ok(request):
        seen["auth"] = request.headers.get("Authorization")
        return web.json_response({"text": "Mark 1 is a ship at the pier."})

    async def call(url):
        return await annotate(_request("t1"), HttpProvider(url, token="secret"))

    result = asyncio.run(_serve(ok, call))
    assert result.text == "Mark 1 is a ship at the pier."
    assert result.provider == "http"
    assert seen["auth"] == "Bearer secret"


def test_http_provider_does_not_retry_client_errors():
    calls = []

    async def rejected(request):
        calls.append(1)
        return web.Response(status=400)

    async def call(url):
        return await annotate(_request("t1"), HttpProvider(url, attempts=3, backoff_s=0))

    with pytest.raises(ProviderError) as exc:
        asyncio.run(_serve(rejected, call))
    assert exc.value.attempts == 1
    assert len(calls) == 1


def test_http_provider_non_json_body_fails_per_request():
    async def html(request):
        return web.Response(status=200, text="<html>gateway</html>", content_type="text/html")

    async def call(url):
        provider = HttpProvider(url, attempts=1, backoff_s=0)
        return await dispatch([_request("a"), _request("b")], provider)

    outcomes = asyncio.run(_serve(html, call))
    assert [ok for ok, _ in outcomes] == [False, False]
    assert [r.triple_id for _, r in outcomes] == ["a", "b"]
    assert all("not JSON" in r.error for _, r in outcomes)


# ── dispatch ──────────────────────────────────────────────────────


class _CrashingProvider(MockProvider):
    name = "crashing"

    async def complete(self, request):
        if request.triple_id == "a":
            raise KeyError("choices")
        return await super().complete(request)


def test_dispatch_survives_unexpected_exceptions():
    outcomes = run_dispatch([_request("a"), _request("b")], _CrashingProvider())
    assert [ok for ok, _ in outcomes] == [False, True]
    assert "KeyError" in outcomes[0][1].error


class _FlakyProvider(MockProvider):
    name = "flaky"

    async def complete(self, request):
        if request.triple_id == "b":
            return ""
        return await super().complete(request)


def test_dispatch_orders_by_triple_id():
    requests = [_request("c"), _request("a"), _request("b")]
    outcomes = run_dispatch(requests, MockProvider(), limit=2)
    assert [r.triple_id for _, r in outcomes] == ["a", "b", "c"]
    assert all(ok for ok, _ in outcomes)


def test_dispatch_keeps_failures():
    requests = [_request("c"), _request("a"), _request("b")]
    outcomes = run_dispatch(requests, _FlakyProvider())
    assert [ok for ok, _ in outcomes] == [True, False, True]
    failed = outcomes[1][1]
    assert not failed.ok
    assert "no text" in failed.error
    assert "text" not in failed.to_dict()


def test_write_results_sorted(tmp_path):
    results = [
        AnnotationResult(triple_id="z", text="last", provider="mock"),
        AnnotationResult(triple_id="a", text="", provider="mock", error="boom"),
    ]
    path = tmp_path / "annotations.jsonl"
    assert write_results(results, path) == 2
    records = [json.loads(line) for line in path.read_text().splitlines()]
    assert [r["triple_id"] for r in records] == ["a", "z"]
    assert records[0]["error"] == "boom"
    assert records[1]["text"] == "last"


def test_request_rejects_empty_prompt():
    with pytest.raises(InvalidArgumentError):
        AnnotationRequest(
            overlay_png=b"", prompt_text=" ", task=AnnotationTask.BRIEF_CAPTION, triple_id="x"
        )
