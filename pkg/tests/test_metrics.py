"""Tests for the semantic, caption and classification metrics."""

import io
import logging
import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))
from gerdsenai_vprompt.errors import (  # noqa: E402
    DegenerateCorpusError,
    EmbeddingFormatError,
    InvalidArgumentError,
    MetricRangeError,
    UsageError,
)
from gerdsenai_vprompt.metrics import (  # noqa: E402
    EmbeddingTable,
    MetricConfig,
    OovPolicy,
    accuracy,
    bleu_n,
    check_range,
    cider,
    cider_scores,
    evaluate,
    format_table,
    join_records,
    load_embeddings,
    load_records,
    normalize,
    parse_metric_names,
    rouge_1,
    rouge_l,
    s_iou,
    sentence_embedding,
    ss,
)

COS = 0.82


@pytest.fixture
def table():
    """airplane/aircraft at cosine 0.82, everything else orthogonal."""
    return EmbeddingTable(
        dim=4,
        vectors={
            "airplane": [1.0, 0.0, 0.0, 0.0],
            "aircraft": [COS, math.sqrt(1 - COS**2), 0.0, 0.0],
            "vehicle": [0.0, 0.0, 1.0, 0.0],
            "building": [0.0, 0.0, 0.0, 1.0],
            "harbor": [0.0, 0.0, 3.0, 4.0],
        },
    )


# ── normalization ─────────────────────────────────────────────────


def test_normalize():
    assert normalize("A Cat. a CAT!") == ["a", "cat", "a", "cat"]
    assert normalize("storage-tank, 2") == ["storage", "tank", "2"]
    assert normalize("the ship", stopwords={"the"}) == ["ship"]
    assert normalize("") == []


def test_check_range():
    assert check_range("x", 1.0 + 1e-12, 0.0, 1.0) == 1.0
    with pytest.raises(MetricRangeError):
        check_range("x", 1.1, 0.0, 1.0)
    with pytest.raises(MetricRangeError):
        check_range("x", float("nan"), 0.0, 1.0)


def test_tau_must_be_open_interval():
    with pytest.raises(InvalidArgumentError):
        MetricConfig(tau=1.0)


# ── embeddings ────────────────────────────────────────────────────


def test_load_embeddings():
    loaded = load_embeddings(io.StringIO("ship 1 0 0\nHarbor 0 1 0\n"))
    assert loaded.dim == 3
    assert len(loaded) == 2
    assert "harbor" in loaded


def test_load_embeddings_duplicate_keeps_last(caplog):
    with caplog.at_level(logging.WARNING):
        loaded = load_embeddings(io.StringIO("ship 1 0\nship 0 1\n"))
    assert np.array_equal(loaded.vectors["ship"], [0.0, 1.0])
    assert "Duplicate" in caplog.text


def test_load_embeddings_ragged_line():
    with pytest.raises(EmbeddingFormatError) as exc:
        load_embeddings(io.StringIO("ship 1 0 0\nharbor 0 1\n"))
    assert exc.value.line == 2


def test_load_embeddings_bad_value():
    with pytest.raises(EmbeddingFormatError) as exc:
        load_embeddings(io.StringIO("ship 1 x\n"))
    assert exc.value.line == 1
    with pytest.raises(EmbeddingFormatError):
        load_embeddings(io.StringIO("ship 1 nan\n"))
    with pytest.raises(EmbeddingFormatError):
        load_embeddings(io.StringIO("\n"))


def test_load_embeddings_from_path(tmp_path):
    path = tmp_path / "vectors.txt"
    path.write_text("ship 1 2\n", encoding="utf-8")
    loaded = load_embeddings(path, oov_policy="skip_token")
    assert loaded.oov_policy is OovPolicy.SKIP_TOKEN


def test_table_is_read_only(table):
    with pytest.raises(ValueError):
        table.vectors["airplane"][0] = 5.0


def test_sentence_embedding(table):
    assert np.allclose(sentence_embedding("harbor", table), [0, 0, 0.6, 0.8])
    assert np.allclose(sentence_embedding("airplane airplane", table), sentence_embedding("airplane", table))
    expected = np.array([1.0, 0.0, 1.0, 0.0]) / math.sqrt(2)
    assert np.allclose(sentence_embedding("airplane vehicle", table), expected)
    assert not sentence_embedding("submarine", table).any()


# ── ss / s_iou ────────────────────────────────────────────────────


def test_ss(table):
    assert ss("airplane", "airplane", table) == pytest.approx(1.0)
    assert ss("airplane", "vehicle", table) == pytest.approx(0.0)
    assert ss("airplane", "aircraft", table) == pytest.approx(COS)
    assert ss("submarine", "airplane", table) == 0.0


def test_s_iou_examples(table):
    assert s_iou("airplane", "airplane", table) == 1.0
    assert s_iou("airplane vehicle", "aircraft building", table) == pytest.approx(0.5)
    assert s_iou("airplane", "vehicle building", table) == 0.0


def test_s_iou_empty_sides(table):
    assert s_iou("", "", table) == 1.0
    assert s_iou("airplane", "", table) == 0.0


def test_s_iou_oov_policies(table):
    # identical unknown tokens still match under zero_vector
    assert s_iou("submarine", "submarine", table) == 1.0
    skip = table.with_policy(OovPolicy.SKIP_TOKEN)
    assert s_iou("airplane submarine", "airplane", skip) == 1.0
    assert s_iou("airplane submarine", "airplane", table) == pytest.approx(2 / 3)


@pytest.mark.parametrize(
    "pred, gt",
    [
        ("airplane vehicle", "aircraft building"),
        ("airplane", "aircraft harbor"),
        ("vehicle harbor", "building"),
    ],
)
def test_s_iou_properties(table, pred, gt):
    score = s_iou(pred, gt, table)
    assert 0.0 <= score <= 1.0
    assert score == pytest.approx(s_iou(gt, pred, table))
    assert s_iou(pred, pred, table) == 1.0
    loose = s_iou(pred, gt, table, MetricConfig(tau=0.3))
    tight = s_iou(pred, gt, table, MetricConfig(tau=0.9))
    assert loose >= score >= tight


WORDS = ["ship", "harbor", "tank", "runway", "field", "river", "bridge", "road", "pier",
         "plane", "storage", "dock", "forest", "pond", "court", "farm", "crane", "tower"]


@pytest.fixture
def random_table():
    g = np.random.default_rng(2024)
    return EmbeddingTable(dim=8, vectors={w: g.standard_normal(8).tolist() for w in WORDS})


def _random_text(g, oov=True, min_len=0):
    vocab = WORDS + (["submarine", "glacier"] if oov else [])
    return " ".join(g.choice(vocab, size=int(g.integers(min_len, 6))))


def test_semantic_invariants_over_random_pairs(random_table):
    g = np.random.default_rng(7)
    for _ in range(10_000):
        pred, gt = _random_text(g), _random_text(g)
        score = ss(pred, gt, random_table)
        assert -1.0 <= score <= 1.0
        assert score == ss(gt, pred, random_table)
        overlap = s_iou(pred, gt, random_table)
        assert 0.0 <= overlap <= 1.0
        assert overlap == s_iou(gt, pred, random_table)
        assert s_iou(pred, pred, random_table) == 1.0
        text = _random_text(g, oov=False, min_len=1)
        assert ss(text, text, random_table) == pytest.approx(1.0, abs=1e-12)


def test_caption_invariants_over_random_pairs():
    g = np.random.default_rng(8)
    for _ in range(10_000):
        pred, gt = _random_text(g, min_len=1), _random_text(g, min_len=1)
        assert 0.0 <= bleu_n(pred, [gt]) <= 1.0
        assert 0.0 <= rouge_l(pred, gt) <= 1.0
        assert rouge_l(pred, gt) == pytest.approx(rouge_l(gt, pred))
        assert bleu_n(pred, [pred]) == pytest.approx(1.0)
        assert rouge_l(pred, pred) == pytest.approx(1.0)


def test_s_iou_non_increasing_in_tau(random_table):
    g = np.random.default_rng(9)
    configs = [MetricConfig(tau=tau) for tau in (0.3, 0.5, 0.7, 0.9)]
    for _ in range(1_000):
        pred, gt = _random_text(g), _random_text(g)
        scores = [s_iou(pred, gt, random_table, cfg) for cfg in configs]
        assert all(a >= b for a, b in zip(scores, scores[1:])), (pred, gt, scores)


# ── caption metrics ───────────────────────────────────────────────


def test_bleu():
    assert bleu_n("the cat sat on the mat", ["the cat sat on the mat"]) == pytest.approx(1.0)
    assert bleu_n("the cat sat", ["the cat sat on the mat"], 1) == pytest.approx(math.exp(-1))
    assert bleu_n("dogs bark", ["the cat sat"], 1) == 0.0
    assert bleu_n("", ["the cat sat"]) == 0.0


@pytest.mark.parametrize("text", ["airport", "storage tanks", "a white ship"])
def test_bleu_short_identity_scores_one(text):
    for n_max in range(1, 5):
        assert bleu_n(text, [text], n_max) == pytest.approx(1.0)


def test_bleu_short_candidate_uses_available_orders():
    # two unigrams and one bigram, both fully matched; brevity penalty e^(1 - 4/2)
    assert bleu_n("the cat", ["the cat sat down"]) == pytest.approx(math.exp(-1))
    assert bleu_n("cat the", ["the cat sat down"]) == 0.0


def test_bleu_uses_all_references():
    refs = ["a ship at the pier", "a vessel near the harbor"]
    assert bleu_n("a vessel near the harbor", refs) == pytest.approx(1.0)


def test_bleu_order_range():
    with pytest.raises(InvalidArgumentError):
        bleu_n("a", ["a"], 5)


def test_rouge():
    assert rouge_l("the cat sat", "the cat sat") == pytest.approx(1.0)
    assert rouge_l("the cat sat", "the cat on the mat") == pytest.approx(0.5)
    assert rouge_l("dogs bark", "the cat sat") == 0.0
    assert rouge_l("", "") == 1.0
    assert rouge_l("", "the cat") == 0.0
    assert rouge_1("the cat sat", "sat the cat") == pytest.approx(1.0)


def test_cider_identical_captions():
    cands = ["a white ship beside the pier", "green farmland around two ponds"]
    refs = [[c] for c in cands]
    assert cider_scores(cands, refs) == pytest.approx([10.0, 10.0])
    assert cider(cands, refs) == pytest.approx(10.0)


def test_cider_no_shared_ngrams():
    cands = ["red roofs near one road", "green farmland around two ponds"]
    refs = [["a white ship beside the pier"], ["green farmland around two ponds"]]
    scores = cider_scores(cands, refs)
    assert scores[0] == 0.0
    assert scores[1] == pytest.approx(10.0)


def test_cider_scale_invariant_for_repeated_tokens():
    refs = [["x x x x"], ["green farmland around two ponds"]]
    same = cider_scores(["x x x x", "green farmland around two ponds"], refs)
    doubled = cider_scores(["x x x x x x x x", "green farmland around two ponds"], refs)
    assert doubled[0] == pytest.approx(same[0])


def test_cider_needs_two_items():
    with pytest.raises(DegenerateCorpusError):
        cider(["a ship"], [["a ship"]])


# ── accuracy ──────────────────────────────────────────────────────


def test_accuracy_exact():
    assert accuracy(["ship", "Harbor"], ["ship", "harbor"]) == 1.0
    assert accuracy(["ship", "bridge", "tank", "road"], ["ship", "harbor", "pier", "dam"]) == 0.25


def test_accuracy_semantic(table):
    assert accuracy(["aircraft"], ["airplane"], matcher="semantic", table=table) == 1.0
    assert accuracy(["vehicle"], ["airplane"], matcher="semantic", table=table) == 0.0


def test_accuracy_errors(table):
    with pytest.raises(InvalidArgumentError):
        accuracy(["a"], ["a", "b"])
    with pytest.raises(InvalidArgumentError):
        accuracy([], [])
    with pytest.raises(InvalidArgumentError):
        accuracy(["a"], ["a"], matcher="semantic")


# ── reports ───────────────────────────────────────────────────────


def test_parse_metric_names():
    assert parse_metric_names("bleu1, rouge_l") == ["bleu1", "rouge_l"]
    with pytest.raises(UsageError):
        parse_metric_names("bleu1,meteor")


def test_join_records():
    preds = {"a": ["ship"], "c": ["road"]}
    gts = {"a": ["ship"], "b": ["harbor"]}
    with pytest.raises(InvalidArgumentError):
        join_records(preds, gts, strict=True)
    assert join_records(preds, gts, strict=False) == [("a", "ship", ["ship"])]


def test_load_records_with_refs(tmp_path):
    path = tmp_path / "gt.jsonl"
    path.write_text(
        '{"id": "a", "refs": ["a ship", "a boat"]}\n{"id": "b", "text": "harbor"}\n'
    )
    assert load_records(path, allow_refs=True) == {"a": ["a ship", "a boat"], "b": ["harbor"]}


def test_evaluate_identical_predictions(table):
    texts = {
        "1": ["a white ship beside the pier"],
        "2": ["green farmland around two ponds"],
    }
    reports = evaluate(texts, texts, "ss,s_iou,bleu4,rouge_l,cider,accuracy", table=table)
    means = {r.metric: r.mean for r in reports}
    assert means["bleu4"] == pytest.approx(1.0)
    assert means["rouge_l"] == pytest.approx(1.0)
    assert means["cider"] == pytest.approx(10.0)
    assert means["accuracy"] == 1.0
    assert means["s_iou"] == 1.0
    assert all(r.n == 2 for r in reports)
    assert "cider" in format_table(reports)


def test_evaluate_semantic_needs_table():
    texts = {"1": ["ship"]}
    with pytest.raises(UsageError):
        evaluate(texts, texts, "ss")
