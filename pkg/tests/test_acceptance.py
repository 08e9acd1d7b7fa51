"""Acceptance suite: one test per primary acceptance criterion.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL/SKIP line
per criterion is printed by the conftest hook.
"""

import json
import os
import random
import time
from pathlib import Path

import pytest

from prescribe.aggression import AggressionFinding, FindingRole, analyze, score
from prescribe.agreement import (
    ConfusionMatrix,
    LabelKind,
    cohen_kappa,
    gwet_ac1,
    percent_agreement,
    report_from_labels,
)
from prescribe.core import AgLevel, DiLabel, level_for_score, verdict
from prescribe.corpus import (
    AnnotationStore,
    DatasetManifest,
    export_analysis,
    export_training,
    import_analysis,
    ingest,
    load_label_streams,
)
from prescribe.intent import classify_di
from prescribe.lexicon import ItemKind, ItemName
from prescribe.llm.annotate import LlmConfig, annotate_batch, parse_score
from prescribe.llm.templates import load_templates
from prescribe.llm.transport import MockTransport
from prescribe.text import TextUnit

from .conftest import CASE_STUDY_1, CASE_STUDY_2
from .reference_scorer import reference_level, reference_score


# --- criterion: case-study goldens -------------------------------------------------


def test_case_study_goldens(seed_lexicon):
    start = time.perf_counter()

    unit1 = TextUnit.from_raw("ex1", CASE_STUDY_1)
    result1 = analyze(unit1, seed_lexicon)
    di1 = classify_di(unit1, result1.findings)
    assert ItemName.AGGRESSIVE_VERB_PHRASE in {f.category for f in result1.findings}
    assert result1.score == 1.0
    assert result1.level == AgLevel.MILD
    assert di1.primary == DiLabel.NOT_TARGETED
    assert verdict(di1.primary, result1.level) is False

    unit2 = TextUnit.from_raw("ex2", CASE_STUDY_2)
    result2 = analyze(unit2, seed_lexicon)
    di2 = classify_di(unit2, result2.findings)
    noun_findings = [
        f for f in result2.findings if f.category == ItemName.AGGRESSIVE_NOUN_DET_PHRASE
    ]
    assert len(noun_findings) == 2
    assert result2.score == 1.0  # uniqueness: both noun phrases count once
    assert result2.level == AgLevel.MILD
    assert di2.primary == DiLabel.NOT_TARGETED
    assert verdict(di2.primary, result2.level) is False

    assert time.perf_counter() - start < 1.0


# --- criterion: verdict truth table -------------------------------------------------


def test_verdict_truth_table():
    seen = []
    for di in (0, 1):
        for ag in (0, 1, 2):
            expected = di == 1 and ag in (1, 2)
            assert verdict(DiLabel(di), AgLevel(ag)) is expected
            seen.append((di, ag))
    assert len(seen) == 6  # the full domain, nothing skipped


# --- criterion: scoring-rule property suite -----------------------------------------

AC_ONLY = [n for n in ItemName if n.kind == ItemKind.AC]


def random_findings(rng, names=None):
    names = names if names is not None else list(ItemName)
    picked = [rng.choice(names) for _ in range(rng.randint(0, 8))]
    return [
        AggressionFinding(
            name,
            None if rng.random() < 0.3 else (i * 10, i * 10 + 5),
            FindingRole.AI if name.kind == ItemKind.AI else FindingRole.AC,
        )
        for i, name in enumerate(picked)
    ]


def test_scoring_rule_property_suite():
    rng = random.Random(20240617)
    iterations = 10_000
    for i in range(iterations):
        findings = random_findings(rng)
        names = [f.category.value for f in findings]
        result = score(findings)
        expected = reference_score(names)

        # production scorer equals the independent brute-force reference, exactly
        assert result.score == expected
        assert int(result.level) == reference_level(expected)

        # (b) uniqueness: duplicating any finding never changes the score
        if findings:
            duplicated = findings + [rng.choice(findings)]
            assert score(duplicated).score == expected

        # (c) special case: a false construct is counted (weight 0.5)
        # iff a catalyzer co-occurs
        if any(f.category == ItemName.FALSE_CONSTRUCT for f in findings):
            has_catalyzer = any(f.category.kind == ItemKind.AC for f in findings)
            assert (ItemName.FALSE_CONSTRUCT in result.counted_categories) == has_catalyzer

    # (a) override: any catalyzer-only multiset scores 0
    for _ in range(2_000):
        findings = random_findings(rng, AC_ONLY)
        assert score(findings).score == 0.0

    # (d) level-mapping boundaries at 0 and 1, exact
    one_ai = [AggressionFinding(ItemName.AGGRESSIVE_VERB_PHRASE, (0, 4), FindingRole.AI)]
    assert score(one_ai).score == 1.0 and score(one_ai).level == AgLevel.MILD
    ai_plus_ac = one_ai + [AggressionFinding(ItemName.IMPERATIVE, (5, 9), FindingRole.AC)]
    assert score(ai_plus_ac).score == 1.5 and score(ai_plus_ac).level == AgLevel.INTENSE
    assert score([]).score == 0.0 and score([]).level == AgLevel.NONE
    assert level_for_score(1.0) == AgLevel.MILD
    assert level_for_score(1.5) == AgLevel.INTENSE


# --- criterion: agreement metrics ----------------------------------------------------


def test_agreement_metrics():
    # hand-computed oracles, 1e-9
    ck = cohen_kappa(ConfusionMatrix((0, 1), ((45, 5), (5, 45))))
    assert abs(ck - 0.80) < 1e-9
    ac1 = gwet_ac1(ConfusionMatrix((0, 1), ((40, 10), (5, 45))))
    assert abs(ac1 - 281 / 401) < 1e-9  # po=0.85, pe=0.49875

    # high-prevalence degenerate case: kappa undefined, AC1 = 1
    degenerate = ConfusionMatrix((0, 1), ((100, 0), (0, 0)))
    assert cohen_kappa(degenerate) is None
    assert gwet_ac1(degenerate) == 1.0

    rng = random.Random(99)
    for _ in range(1_000):
        k = rng.choice([2, 3])
        rows = [[rng.randint(0, 25) for _ in range(k)] for _ in range(k)]
        if sum(map(sum, rows)) == 0:
            rows[0][0] = 1
        m = ConfusionMatrix(tuple(range(k)), tuple(tuple(r) for r in rows))
        t = m.transpose()

        # symmetry under rater swap
        assert percent_agreement(m) == percent_agreement(t)
        ck_m, ck_t = cohen_kappa(m), cohen_kappa(t)
        assert (ck_m is None) == (ck_t is None)
        if ck_m is not None:
            assert abs(ck_m - ck_t) < 1e-9
        assert abs(gwet_ac1(m) - gwet_ac1(t)) < 1e-9

        # permutation invariance of category labels
        perm = list(range(k))
        rng.shuffle(perm)
        permuted = ConfusionMatrix(
            tuple(range(k)),
            tuple(tuple(rows[perm[i]][perm[j]] for j in range(k)) for i in range(k)),
        )
        ck_p = cohen_kappa(permuted)
        if ck_m is not None and ck_p is not None:
            assert abs(ck_m - ck_p) < 1e-9
        assert abs(gwet_ac1(m) - gwet_ac1(permuted)) < 1e-9

        # perfect agreement iff no off-diagonal mass
        off_diag = sum(rows[i][j] for i in range(k) for j in range(k) if i != j)
        if off_diag == 0:
            assert gwet_ac1(m) == 1.0
            if ck_m is not None:
                assert ck_m == 1.0
        else:
            assert gwet_ac1(m) < 1.0


# --- criterion: published reliability-table reproduction (conditional) ---------------

PUBLISHED_RELIABILITY_ROWS = [
    ("1AG_C", "2AG_C", LabelKind.AG, 0.8422, 0.8419, 90.75),
    ("1DI_C", "2DI_C", LabelKind.DI, 0.5913, 0.5908, 91.50),
    ("1T_C", "2T_C", LabelKind.TOXICITY, 0.7487, 0.7486, 92.50),
]


def released_file() -> Path | None:
    candidates = []
    env = os.environ.get("PRESCRIBE_RELEASED_400")
    if env:
        candidates.append(Path(env))
    candidates.append(Path(__file__).resolve().parent.parent / "data" / "released" / "annotations_400.csv")
    for path in candidates:
        if path.exists():
            return path
    return None


def test_published_reliability_reproduction():
    path = released_file()
    if path is None:
        pytest.skip(
            "published reliability reproduction skipped: released 400-piece annotation file not "
            "found (set PRESCRIBE_RELEASED_400 or place data/released/annotations_400.csv); "
            "all other criteria run regardless"
        )
    start = time.perf_counter()
    streams = load_label_streams(path)
    for a, b, kind, ck, ac1, agr in PUBLISHED_RELIABILITY_ROWS:
        report = report_from_labels(streams[a], streams[b], kind, (a, b))
        assert report.cohen_kappa == pytest.approx(ck, abs=0.005), (a, b)
        assert report.gwet_ac1 == pytest.approx(ac1, abs=0.005), (a, b)
        assert report.percent_agreement * 100 == pytest.approx(agr, abs=0.005), (a, b)
    assert time.perf_counter() - start < 5.0


# --- criterion: LLM pipeline offline end-to-end ---------------------------------------


class SimulatedInterrupt(BaseException):
    """Stands in for an operator interrupt without pytest special-casing."""


class InterruptingTransport:
    name = "interrupting"

    def __init__(self, inner, fail_after_calls):
        self.inner = inner
        self.fail_after_calls = fail_after_calls
        self.calls = 0

    def complete(self, payload):
        self.calls += 1
        if self.calls > self.fail_after_calls:
            raise SimulatedInterrupt()
        return self.inner.complete(payload)


def batch_corpus(n=400):
    texts = [
        "you are a stupid bitch honestly",
        "Well, FUCK. what a day",
        "have a lovely afternoon everyone",
        "those bitches ruined the game",
        "Shut the door. it is freezing",
        "how come your people really believe in flat earth?",
        "i'm so fucking done with homework",
        "nothing but respect for the team",
    ]
    return [
        TextUnit.from_raw(f"unit{i:04d}", f"{texts[i % len(texts)]} (case {i})")
        for i in range(n)
    ]


def make_clock():
    state = {"t": -1.0}

    def clock():
        state["t"] += 1.0
        return state["t"]

    return clock


def test_llm_pipeline_offline(tmp_path, seed_lexicon):
    start = time.perf_counter()
    units = batch_corpus(400)
    templates = load_templates()
    config = LlmConfig(model="mock-model", backoff=0.0)

    def run_batch(store_path, transport, run_log=None):
        store = AnnotationStore(store_path)
        summary = annotate_batch(
            units,
            "prescriptive",
            transport,
            templates,
            config,
            store,
            run_log_path=run_log,
            concurrency=4,
            clock=make_clock(),
        )
        return store, summary

    # 400 units in, 400 records out
    store_a, summary_a = run_batch(
        tmp_path / "a.jsonl", MockTransport(seed_lexicon, wrong_level_every=3),
        run_log=tmp_path / "runs_a.jsonl",
    )
    assert summary_a.succeeded == 400
    assert len(store_a) == 400

    # byte-stable across two fresh runs
    store_b, _ = run_batch(tmp_path / "b.jsonl", MockTransport(seed_lexicon, wrong_level_every=3))
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()

    # resumes after interruption at an arbitrary point (here: mid-unit 138)
    resume_path = tmp_path / "c.jsonl"
    interrupting = InterruptingTransport(
        MockTransport(seed_lexicon, wrong_level_every=3), fail_after_calls=3 * 137 + 1
    )
    with pytest.raises(SimulatedInterrupt):
        store_c = AnnotationStore(resume_path)
        annotate_batch(
            units, "prescriptive", interrupting, templates, config, store_c,
            concurrency=1, clock=make_clock(),
        )
    interrupted_count = len(AnnotationStore(resume_path))
    assert interrupted_count < 400
    store_c, summary_c = run_batch(
        resume_path, MockTransport(seed_lexicon, wrong_level_every=3)
    )
    assert summary_c.skipped == interrupted_count
    assert len(store_c) == 400
    annotator = config.annotator_id("prescriptive")
    labels_a = {
        uid: (int(r.di), int(r.ag), r.ag_score, r.toxic)
        for uid, r in store_a.latest_for_annotator(annotator).items()
    }
    labels_c = {
        uid: (int(r.di), int(r.ag), r.ag_score, r.toxic)
        for uid, r in store_c.latest_for_annotator(annotator).items()
    }
    assert labels_a == labels_c

    # the local level mapping overrides model-stated levels
    lies = 0
    for line in (tmp_path / "runs_a.jsonl").read_text().splitlines():
        run = json.loads(line)
        if run["kind"] != "prescriptive_ag_scoring" or not run["parsed"]:
            continue
        parsed_score, claimed = parse_score(run["response"])
        if claimed is not None and claimed != int(level_for_score(parsed_score)):
            lies += 1
    assert lies > 0, "mock transport never mis-stated a level; property untested"
    for record in store_a.records():
        assert record.ag == level_for_score(record.ag_score)

    assert time.perf_counter() - start < 10.0


# --- criterion: corpus round-trip ------------------------------------------------------


def test_corpus_round_trip(tmp_path, seed_lexicon):
    start = time.perf_counter()
    counts = {"reddit_aae": 295, "olid": 341, "davidson_offhate": 311, "hateval": 1000}
    phrases = [
        "what a ride that was",
        "you are so fucking wrong about this",
        "honestly the best pizza in town",
        "those people should stop whining",
        "i hate mondays with a passion",
    ]

    def text_for(source, i):
        return f"{phrases[i % len(phrases)]} variant {source}-{i}"

    fixtures = tmp_path / "fixtures"
    fixtures.mkdir()
    duplicated_texts = [text_for("reddit_aae", i) for i in range(5)]

    def write_source(name, count, fmt):
        path = fixtures / f"{name}.{fmt}"
        with open(path, "w", encoding="utf-8") as fh:
            if fmt == "csv":
                fh.write("id,text\n")
            for i in range(count):
                # the last source repeats five texts from the first one
                if name == "hateval" and i < 5:
                    text = duplicated_texts[i]
                else:
                    text = text_for(name, i)
                if fmt == "csv":
                    fh.write(f"{i},\"{text}\"\n")
                else:
                    fh.write(json.dumps({"id": i, "text": text}) + "\n")
        return path

    write_source("reddit_aae", 295, "jsonl")
    write_source("olid", 341, "csv")
    write_source("davidson_offhate", 311, "csv")
    write_source("hateval", 1000, "jsonl")
    manifest_path = fixtures / "manifest.json"
    manifest_path.write_text(
        json.dumps(
            {
                "sources": [
                    {
                        "name": name,
                        "path": f"{name}.{'csv' if name in ('olid', 'davidson_offhate') else 'jsonl'}",
                        "format": "csv" if name in ("olid", "davidson_offhate") else "jsonl",
                        "expected_count": count,
                    }
                    for name, count in counts.items()
                ]
            }
        ),
        encoding="utf-8",
    )

    units, report = ingest(DatasetManifest.load(manifest_path), fixtures)
    assert report.per_source == list(counts.items())
    assert sum(c for _, c in report.per_source) == 1947
    assert len(report.dropped_duplicates) == 5  # dedup report emitted
    assert report.total == len(units) == 1942

    # export -> import identity over engine annotations
    from prescribe.pipeline import annotate_with_engine

    store = AnnotationStore(tmp_path / "store.jsonl")
    for i, unit in enumerate(units):
        store.append(annotate_with_engine(unit, seed_lexicon, created_at=float(i)))
    out = tmp_path / "analysis.jsonl"
    count = export_analysis(store, out)
    assert count == 1942
    assert import_analysis(out) == list(store.records())

    train = tmp_path / "train.jsonl"
    assert export_training(store, units, train, annotator="engine") == 1942
    lines = [json.loads(l) for l in train.read_text().splitlines()]
    assert all(line["di"] in (0, 1) and line["ag"] in (0, 1, 2) for line in lines)

    assert time.perf_counter() - start < 5.0
