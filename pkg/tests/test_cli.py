"""End-to-end tests for the vprompt command line."""

import json
import logging
import sys
from pathlib import Path

import pytest
from PIL import Image

sys.path.insert(0, str(Path(__file__).parent.parent))
from gerdsenai_vprompt.cli import main  # noqa: E402
from gerdsenai_vprompt.cli.config import (  # noqa: E402
    ENV_ENDPOINT,
    ENV_TOKEN,
    CliConfig,
    apply_flags,
    load_config,
)
from gerdsenai_vprompt.errors import InvalidArgumentError, UsageError  # noqa: E402

ROC = "referring_object_classification"


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    """No user config, no annotation env, a clean root logger afterwards."""
    home = tmp_path / "home"
    home.mkdir()
    monkeypatch.setenv("HOME", str(home))
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(ENV_ENDPOINT, raising=False)
    monkeypatch.delenv(ENV_TOKEN, raising=False)
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_vprompt", False):
            root.removeHandler(handler)


@pytest.fixture
def corpus(tmp_path):
    detections = {
        "images": [
            {"id": f"img{i}", "file": f"img{i}.png", "width": 128, "height": 128,
             "instances": [{"category": "ship", "bbox": [10 + i, 20, 30, 15]}]}
            for i in range(3)
        ]
    }
    (tmp_path / "ships.json").write_text(json.dumps(detections))
    (tmp_path / "scenes.json").write_text(
        json.dumps({"images": [{"id": "s0", "file": "s0.png", "width": 96, "height": 96,
                                "text": "airport"}]})
    )
    manifest = {
        "seed": 3,
        "entries": [
            {"source": "ships.json", "modality": "optical", "task": ROC, "adapter": "canonical"},
            {"source": "scenes.json", "modality": "optical", "task": "scene_classification",
             "adapter": "captions"},
        ],
    }
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))

    images = tmp_path / "rgb"
    images.mkdir()
    for i in range(3):
        Image.new("RGB", (128, 128), (30, 60, 90)).save(images / f"img{i}.png")
    Image.new("RGB", (96, 96), (70, 70, 70)).save(images / "s0.png")
    return tmp_path


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def _convert(capsys, corpus, name="triples.jsonl", *extra):
    out = corpus / name
    code, doc = _run(capsys, ["convert", str(corpus / "manifest.json"), "-o", str(out), *extra])
    assert code == 0
    return out, doc


# ── convert ───────────────────────────────────────────────────────


def test_convert_summary(capsys, corpus):
    out, doc = _convert(capsys, corpus)
    assert doc["command"] == "convert"
    assert doc["triples"] == 4
    assert doc["seed"] == 3
    assert doc["by_task"] == {ROC: 3, "scene_classification": 1}
    assert doc["by_modality"] == {"optical": 4}
    assert doc["errors"] == []
    assert len(out.read_text().splitlines()) == 4


def test_convert_is_deterministic(capsys, corpus):
    first, _ = _convert(capsys, corpus, "a.jsonl", "--threads", "1")
    second, _ = _convert(capsys, corpus, "b.jsonl", "--threads", "4")
    assert first.read_bytes() == second.read_bytes()
    other, doc = _convert(capsys, corpus, "c.jsonl", "--seed", "99")
    assert doc["seed"] == 99
    assert other.read_bytes() != first.read_bytes()


def test_convert_alpha_zero_keeps_boxes(capsys, corpus):
    out, _ = _convert(capsys, corpus, "exact.jsonl", "--alpha", "0")
    first = json.loads(out.read_text().splitlines()[0])
    assert first["prompts"][0]["box"] == [10, 20, 30, 15]


def test_convert_missing_source_is_lenient_unless_strict(capsys, corpus):
    manifest = json.loads((corpus / "manifest.json").read_text())
    manifest["entries"].append(
        {"source": "missing.json", "modality": "sar", "task": ROC, "adapter": "canonical"}
    )
    (corpus / "manifest.json").write_text(json.dumps(manifest))
    _, doc = _convert(capsys, corpus)
    assert doc["triples"] == 4
    assert len(doc["errors"]) == 1
    code, _ = _run(
        capsys, ["convert", str(corpus / "manifest.json"), "-o", str(corpus / "s.jsonl"), "--strict"]
    )
    assert code == 1


def test_convert_bad_alpha_is_usage_error(capsys, corpus):
    code, doc = _run(
        capsys, ["convert", str(corpus / "manifest.json"), "-o", "x.jsonl", "--alpha", "-1"]
    )
    assert code == 2
    assert doc is None


# ── render / annotate ─────────────────────────────────────────────


def test_render_writes_pngs(capsys, corpus):
    triples, _ = _convert(capsys, corpus)
    out = corpus / "overlays"
    code, doc = _run(capsys, ["render", str(triples), "-o", str(out), "--images", str(corpus / "rgb")])
    assert code == 0
    assert doc["rendered"] == 4
    assert doc["failed"] == 0
    names = sorted(p.name for p in out.glob("*.png"))
    assert len(names) == 4
    with Image.open(out / names[0]) as image:
        assert image.size in ((128, 128), (96, 96))


def test_render_missing_image(capsys, corpus):
    triples, _ = _convert(capsys, corpus)
    (corpus / "rgb" / "img1.png").unlink()
    args = ["render", str(triples), "-o", str(corpus / "overlays"), "--images", str(corpus / "rgb")]
    code, doc = _run(capsys, args)
    assert code == 0
    assert doc["rendered"] == 3
    assert doc["failed"] == 1
    code, _ = _run(capsys, args + ["--strict"])
    assert code == 1


def test_render_bad_style_is_usage_error(capsys, corpus):
    triples, _ = _convert(capsys, corpus)
    code, _ = _run(capsys, ["render", str(triples), "-o", "out", "--stroke-width", "0"])
    assert code == 2


def test_annotate_with_mock(capsys, corpus):
    triples, _ = _convert(capsys, corpus)
    out = corpus / "annotations.jsonl"
    code, doc = _run(
        capsys,
        ["annotate", str(triples), "-o", str(out), "--images", str(corpus / "rgb"),
         "--threads", "2"],
    )
    assert code == 0
    assert doc["provider"] == "mock"
    assert doc["annotated"] == 4
    assert doc["failed"] == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    ids = [r["triple_id"] for r in records]
    assert ids == sorted(ids)
    assert all(r["text"] for r in records)


@pytest.fixture
def hundred(tmp_path):
    """100 detection images with one to three instances each, plus their pixels."""
    images = tmp_path / "rgb"
    images.mkdir()
    entries = []
    for i in range(100):
        instances = [
            {"category": ("ship", "harbor", "bridge")[j], "bbox": [8 + 20 * j, 10 + i % 7, 16, 16]}
            for j in range(1 + i % 3)
        ]
        entries.append({"id": f"im{i:03d}", "file": f"im{i:03d}.png", "width": 80, "height": 64,
                        "instances": instances})
        Image.new("RGB", (80, 64), (i, 40, 80)).save(images / f"im{i:03d}.png")
    (tmp_path / "many.json").write_text(json.dumps({"images": entries}))
    (tmp_path / "manifest.json").write_text(json.dumps({"seed": 5, "entries": [
        {"source": "many.json", "modality": "optical", "task": ROC, "adapter": "canonical"}
    ]}))
    return tmp_path


def test_annotate_hundred_triples_is_deterministic(capsys, hundred):
    triples, doc = _convert(capsys, hundred)
    assert doc["triples"] == 100
    marks = {
        t["id"]: [p["mark_id"] for p in t["prompts"]]
        for t in map(json.loads, triples.read_text().splitlines())
    }
    outputs = []
    for threads in ("1", "4"):
        out = hundred / f"annotations-{threads}.jsonl"
        code, doc = _run(capsys, ["annotate", str(triples), "-o", str(out),
                                  "--images", str(hundred / "rgb"), "--threads", threads])
        assert code == 0
        assert doc["annotated"] == 100 and doc["failed"] == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]

    records = [json.loads(line) for line in outputs[0].decode().splitlines()]
    ids = [r["triple_id"] for r in records]
    assert ids == sorted(ids) == sorted(marks)
    for record in records:
        for mark_id in marks[record["triple_id"]]:
            assert f"Mark {mark_id}." in record["text"]


def test_annotate_http_needs_endpoint(capsys, corpus):
    triples, _ = _convert(capsys, corpus)
    code, _ = _run(capsys, ["annotate", str(triples), "-o", "a.jsonl", "--provider", "http"])
    assert code == 1


# ── eval ──────────────────────────────────────────────────────────


def test_eval_identical_files(capsys, tmp_path):
    records = [
        {"id": "1", "text": "a white ship beside the pier"},
        {"id": "2", "text": "green farmland around two ponds"},
    ]
    path = tmp_path / "records.jsonl"
    path.write_text("".join(json.dumps(r) + "\n" for r in records))
    code, doc = _run(capsys, ["eval", str(path), str(path), "--metrics", "bleu1,rouge_l,accuracy"])
    assert code == 0
    means = {r["metric"]: r["mean"] for r in doc["reports"]}
    assert means == pytest.approx({"bleu1": 1.0, "rouge_l": 1.0, "accuracy": 1.0})
    assert doc["tau"] == 0.5


def test_eval_with_embeddings(capsys, tmp_path):
    (tmp_path / "vectors.txt").write_text("airplane 1 0\naircraft 1 0\nship 0 1\n")
    (tmp_path / "pred.jsonl").write_text('{"id": "1", "text": "aircraft"}\n')
    (tmp_path / "gt.jsonl").write_text('{"id": "1", "text": "airplane"}\n')
    code, doc = _run(
        capsys,
        ["eval", "pred.jsonl", "gt.jsonl", "--metrics", "s_iou",
         "--embeddings", "vectors.txt", "--tau", "0.9"],
    )
    assert code == 0
    assert doc["reports"][0]["mean"] == pytest.approx(1.0)
    assert doc["tau"] == 0.9


def test_eval_unknown_metric(capsys, tmp_path):
    path = tmp_path / "records.jsonl"
    path.write_text('{"id": "1", "text": "ship"}\n')
    code, doc = _run(capsys, ["eval", str(path), str(path), "--metrics", "bleu1,meteor"])
    assert code == 2
    assert doc is None


def test_eval_tau_out_of_range(capsys, tmp_path):
    path = tmp_path / "records.jsonl"
    path.write_text('{"id": "1", "text": "ship"}\n')
    code, _ = _run(capsys, ["eval", str(path), str(path), "--metrics", "bleu1", "--tau", "1.5"])
    assert code == 2


# ── kernel-check ──────────────────────────────────────────────────


def test_kernel_check_passes(capsys):
    code, doc = _run(capsys, ["kernel-check", "--seeds", "1"])
    assert code == 0
    assert doc["command"] == "kernel-check"
    assert doc["passed"] is True


def test_kernel_check_injected_fault(capsys):
    code, doc = _run(capsys, ["kernel-check", "--seeds", "1", "--inject-fault"])
    assert code == 1
    assert doc["passed"] is False


def test_kernel_check_bad_dims(capsys):
    code, _ = _run(capsys, ["kernel-check", "--d-v", "0"])
    assert code == 2


def test_kernel_check_multiple_views(capsys):
    code, doc = _run(capsys, ["kernel-check", "--seeds", "1", "--views", "2"])
    assert code == 0
    assert doc["config"]["n_views"] == 2
    assert doc["image_tokens"] == 2 * doc["img_rows"]
    code, _ = _run(capsys, ["kernel-check", "--views", "0"])
    assert code == 2


# ── config ────────────────────────────────────────────────────────


def test_config_defaults():
    cfg = load_config()
    assert cfg.source is None
    assert cfg.provider == "mock"
    assert cfg.run_seed == 0


def test_config_discovered_in_cwd(tmp_path):
    (tmp_path / "vprompt.json").write_text(json.dumps({"tau": 0.7, "colour": "red"}))
    cfg = load_config()
    assert cfg.tau == 0.7
    assert cfg.source == str(tmp_path / "vprompt.json")


def test_home_config_wins_over_cwd(tmp_path):
    user = tmp_path / "home" / ".config" / "gerdsenai"
    user.mkdir(parents=True)
    (user / "vprompt.json").write_text(json.dumps({"k": 6}))
    (tmp_path / "vprompt.json").write_text(json.dumps({"k": 2}))
    assert load_config().k == 6


def test_invalid_config_file_is_skipped(tmp_path):
    (tmp_path / "vprompt.json").write_text("{not json")
    assert load_config().source is None


def test_env_overrides_config(tmp_path):
    (tmp_path / "vprompt.json").write_text(json.dumps({"endpoint": "http://file/x"}))
    cfg = load_config(env={ENV_ENDPOINT: "http://env/x", ENV_TOKEN: "t0k"})
    assert cfg.endpoint == "http://env/x"
    assert cfg.token == "t0k"


def test_flags_override_everything():
    cfg = apply_flags(CliConfig(threads=2), {"threads": 5, "tau": None, "out": "x"})
    assert cfg.threads == 5
    assert cfg.tau == 0.5


def test_explicit_config_must_exist(capsys, tmp_path):
    with pytest.raises(UsageError):
        load_config(str(tmp_path / "nope.json"))
    code, _ = _run(capsys, ["kernel-check", "--seeds", "1", "--config", "nope.json"])
    assert code == 2


def test_config_validation():
    with pytest.raises(InvalidArgumentError):
        CliConfig(threads=0)
    with pytest.raises(InvalidArgumentError):
        CliConfig(seed=-1)
