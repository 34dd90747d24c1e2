"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines inline.
The sidecar protocol-conformance criterion lives in the sidecar package's
own suite (sidecar/tests), since it needs that service.
"""

import functools
import json
import random
import time
from pathlib import Path

import numpy as np
import pytest

from dashcoach.catalog import default_catalog, expand_for_clip
from dashcoach.cli import main as cli_main
from dashcoach.coaching import align_with_db, compose_report, default_db, detect_events
from dashcoach.errors import MetricError
from dashcoach.frames import FrameSet, MergePolicy, merge_clip, merge_side_by_side
from dashcoach.manifest import ClipPair
from dashcoach.metrics import accuracy_rate, bert_score, corpus_bleu
from dashcoach.metrics.ar import ERJudgement
from dashcoach.metrics.bertscore import EmbeddingMatrix
from dashcoach.parsing import ParsedAnswer, default_rules, normalize
from dashcoach.report import recompute_ar_from_items

from stubproto import StubServer
from test_bertscore import brute_force_scores
from test_coaching import make_transcript
from test_parsing import _classify_row, expected_answer, load_corpus

DATA = Path(__file__).resolve().parent / "data"
GOLDEN_PORT = 18907  # must match the URL recorded in the checked-in golden


def criterion(name, budget_s):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"\nACCEPTANCE {name}: FAIL")
                raise
            elapsed = time.perf_counter() - start
            print(f"\nACCEPTANCE {name}: PASS ({elapsed:.2f}s, budget {budget_s}s)")
            assert elapsed < budget_s, f"{name} exceeded its {budget_s}s runtime budget"
        return wrapper
    return deco


@criterion("bleu-oracle-equivalence", budget_s=1.0)
def test_bleu_oracle_equivalence():
    rows = [json.loads(l) for l in (DATA / "bleu_corpus.jsonl").read_text().splitlines()]
    assert len(rows) == 50
    for row in rows:
        got = corpus_bleu([row["hyp"]], [row["ref"]]).score
        assert abs(got - row["expected_bleu"]) <= 0.01, row["hyp"]
    golden = json.loads((DATA / "bleu_corpus_golden.json").read_text())
    corpus = corpus_bleu([r["hyp"] for r in rows], [r["ref"] for r in rows])
    assert abs(corpus.score - golden["expected_bleu"]) <= 0.01


@criterion("bertscore-oracle-equivalence", budget_s=1.0)
def test_bertscore_oracle_equivalence():
    rng = np.random.default_rng(20240909)
    for _ in range(100):
        hyp = rng.normal(size=(int(rng.integers(1, 21)), 16))
        ref = rng.normal(size=(int(rng.integers(1, 21)), 16))
        got = bert_score(
            EmbeddingMatrix([f"h{i}" for i in range(len(hyp))], hyp),
            EmbeddingMatrix([f"r{i}" for i in range(len(ref))], ref),
        )
        p, r, f = brute_force_scores(hyp, ref)
        assert abs(got.precision - p) <= 1e-9
        assert abs(got.recall - r) <= 1e-9
        assert abs(got.f1 - f) <= 1e-9


@criterion("ar-formula-properties", budget_s=1.0)
def test_ar_formula_properties():
    rng = random.Random(4242)
    yes = ParsedAnswer.affirmative()
    no = ParsedAnswer.negative()
    for _ in range(1000):
        t = rng.randint(0, 200)
        f = rng.randint(0, 200)
        if t + f == 0:
            continue
        js = [ERJudgement("c", "x", yes, yes, True)] * t + [
            ERJudgement("c", "x", yes, no, False)
        ] * f
        result = accuracy_rate(js)
        assert result.ar == t / (t + f)
        assert result.true_events == t and result.false_events == f
    with pytest.raises(MetricError):
        accuracy_rate([])
    js = [ERJudgement("c", str(i), yes, yes if i % 3 else no, bool(i % 3)) for i in range(30)]
    shuffled = js[:]
    rng.shuffle(shuffled)
    assert accuracy_rate(js) == accuracy_rate(shuffled)


@criterion("catalog-count-consistency", budget_s=1.0)
def test_catalog_count_consistency():
    catalog = default_catalog()
    total_er = total_oq = 0
    for i in range(100):
        er = oq = 0
        for inst in expand_for_clip(catalog, f"syn{i}"):
            if catalog.template(inst.template_id).er_countable:
                er += 1
            else:
                oq += 1
        assert (er, oq) == (20, 2)
        total_er += er
        total_oq += oq
    assert total_er == 2000
    assert total_oq == 200


@criterion("merge-invariants", budget_s=5.0)
def test_merge_invariants():
    rng = np.random.default_rng(777)
    for _ in range(20):
        w = int(rng.integers(16, 120))
        h = int(rng.integers(16, 100))
        k = int(rng.integers(1, 5))
        policy = MergePolicy(sample_count=k, width=w, height=h)
        times = [float(t) for t in np.sort(rng.uniform(0.1, 9.0, size=k))]

        def frame_set():
            return FrameSet(
                clip_id="r",
                frames=[rng.integers(0, 255, (h, w, 3)).astype(np.uint8) for _ in range(k)],
                timestamps=times,
                width=w,
                height=h,
            )

        merged = merge_side_by_side(frame_set(), frame_set(), policy)
        assert merged.width == 2 * w
        assert merged.height == h
        assert all(f.shape == (h, 2 * w, 3) for f in merged.frames)

    # black/white halves, pixel-exact
    policy = MergePolicy(1, 32, 24)
    black = FrameSet("b", [np.zeros((24, 32, 3), np.uint8)], [1.0], 32, 24)
    white = FrameSet("b", [np.full((24, 32, 3), 255, np.uint8)], [1.0], 32, 24)
    frame = merge_side_by_side(black, white, policy).frames[0]
    assert (frame[:, :32] == 0).all() and (frame[:, 32:] == 255).all()

    # byte-exact match against the externally produced composite golden
    from PIL import Image

    fixture = DATA / "fixture"
    clip = ClipPair(
        id="c1",
        road_video=str(fixture / "clips/c1/road"),
        driver_video=str(fixture / "clips/c1/driver"),
        duration_s=8.0,
        split="test",
    )
    merged = merge_clip(clip, MergePolicy(4, 64, 48))
    with Image.open(DATA / "composite_golden.png") as im:
        golden = np.asarray(im.convert("RGB"))
    assert merged.frames[0].tobytes() == golden.tobytes()


@criterion("parser-corpus-agreement", budget_s=1.0)
def test_parser_corpus_agreement():
    rules = default_rules()
    rows = load_corpus(DATA / "response_corpus.jsonl")
    assert len(rows) == 100
    for row in rows:
        got = _classify_row(row, rules)
        exp = expected_answer(row)
        assert got.variant == exp.variant and got.label == exp.label, row["raw"]
        if exp.text is not None:
            assert got.text == exp.text
        if "expected_normalized" in row:
            assert normalize(row["raw"], rules) == row["expected_normalized"]
        once = normalize(row["raw"], rules)
        assert normalize(once, rules) == once


@criterion("end-to-end-determinism", budget_s=30.0)
def test_end_to_end_determinism(tmp_path):
    fixture = DATA / "fixture"
    golden_path = DATA / "eval_report_golden.json"
    with StubServer(seed=42, port=GOLDEN_PORT) as server:
        code = cli_main(
            [
                "evaluate",
                "--manifest", str(fixture / "manifest.json"),
                "--gold", str(fixture / "gold.jsonl"),
                "--endpoint", f"stub={server.url}",
                "--out", str(tmp_path),
                "--seed", "42",
                "--frames", "4",
                "--frame-width", "64",
                "--frame-height", "48",
                "--timestamp", "2026-01-01T00:00:00Z",
                "--no-figures",
            ]
        )
    assert code == 0
    produced = (tmp_path / "report.json").read_bytes()
    assert produced == golden_path.read_bytes(), "report is not byte-identical to the golden"
    report = json.loads(produced)
    ar_reported = report["models"]["stub"]["ar"]["ar"]
    assert recompute_ar_from_items(report, "stub") == pytest.approx(ar_reported, abs=1e-12)
    # per-clip exhaustive issue counts: 20 ER + 2 OQ
    items = report["models"]["stub"]["per_item"]
    for cid in ("c1", "c2", "c3"):
        kinds = [i["kind"] for i in items if i["clip_id"] == cid]
        assert kinds.count("er") == 20 and kinds.count("oq") == 2


@criterion("coaching-traceability", budget_s=5.0)
def test_coaching_traceability():
    catalog = default_catalog()
    db = default_db()
    rng = random.Random(31337)
    for _ in range(50):
        answers = {}
        for t in catalog.templates:
            if t.kind == "binary":
                answers[t.id] = rng.choice(
                    [ParsedAnswer.affirmative(), ParsedAnswer.negative(), ParsedAnswer.unparseable("?")]
                )
            elif t.kind == "categorical":
                answers[t.id] = ParsedAnswer.choice(rng.choice(t.choices).label)
            else:
                answers[t.id] = ParsedAnswer.explanation("Steady traffic on a wet road.")
        transcript = make_transcript(catalog, answers)
        record = detect_events(transcript, catalog)
        entries = align_with_db(record, db)
        report_a = compose_report(record, entries, db)
        report_b = compose_report(record, entries, db)
        assert report_a.driver_text.encode() == report_b.driver_text.encode()
        assert report_a.manager_text.encode() == report_b.manager_text.encode()
        affirmative = {
            e.instance.template_id for e in transcript.entries if e.parsed.variant == "affirmative"
        }
        for label, _sev, _ex in report_a.events:
            assert db.lookup(label) is not None
            assert any(
                t.event_label == label and t.id in affirmative for t in catalog.templates
            ), f"reported event {label} lacks an affirmative source"
