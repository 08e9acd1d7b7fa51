import json

import pytest

from prescribe.aggression import AggressionFinding, FindingRole
from prescribe.core import AgLevel, AnnotationRecord, DiLabel
from prescribe.corpus import (
    AnnotationStore,
    CorpusError,
    DatasetManifest,
    export_analysis,
    export_training,
    import_analysis,
    ingest,
    load_corpus,
    record_from_dict,
    record_to_dict,
    save_corpus,
)
from prescribe.lexicon import ItemName
from prescribe.text import TextUnit


def write_manifest(tmp_path, sources):
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"sources": sources}), encoding="utf-8")
    return path


def write_jsonl(tmp_path, name, rows):
    path = tmp_path / name
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return path


def write_csv(tmp_path, name, header, rows):
    path = tmp_path / name
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(x) for x in row) + "\n")
    return path


def test_ingest_two_formats_with_adapters(tmp_path):
    write_jsonl(
        tmp_path,
        "a.jsonl",
        [{"post_id": i, "body": f"hello number {i}"} for i in range(3)],
    )
    write_csv(tmp_path, "b.csv", ["id", "text", "label"], [[i, f"other text {i}", 1] for i in range(2)])
    manifest = DatasetManifest.load(
        write_manifest(
            tmp_path,
            [
                {
                    "name": "src_a",
                    "path": "a.jsonl",
                    "format": "jsonl",
                    "expected_count": 3,
                    "columns": {"id": "post_id", "text": "body"},
                },
                {"name": "src_b", "path": "b.csv", "format": "csv", "expected_count": 2},
            ],
        )
    )
    units, report = ingest(manifest, tmp_path)
    assert [u.id for u in units[:3]] == ["src_a:0", "src_a:1", "src_a:2"]
    assert report.per_source == [("src_a", 3), ("src_b", 2)]
    assert report.total == 5
    assert units[0].source == "src_a"


def test_ingest_count_mismatch_is_hard_error(tmp_path):
    write_jsonl(tmp_path, "a.jsonl", [{"id": 1, "text": "x"}])
    manifest = DatasetManifest.load(
        write_manifest(
            tmp_path,
            [{"name": "a", "path": "a.jsonl", "format": "jsonl", "expected_count": 5}],
        )
    )
    with pytest.raises(CorpusError, match="expected 5"):
        ingest(manifest, tmp_path)


def test_ingest_missing_file_names_path(tmp_path):
    manifest = DatasetManifest.load(
        write_manifest(tmp_path, [{"name": "a", "path": "gone.jsonl", "format": "jsonl"}])
    )
    with pytest.raises(CorpusError, match="gone.jsonl"):
        ingest(manifest, tmp_path)


def test_ingest_malformed_row_names_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": 1, "text": "ok"}\nnot json\n', encoding="utf-8")
    manifest = DatasetManifest.load(
        write_manifest(tmp_path, [{"name": "a", "path": "bad.jsonl", "format": "jsonl"}])
    )
    with pytest.raises(CorpusError, match=":2:"):
        ingest(manifest, tmp_path)


def test_ingest_dedup_reports_dropped_ids(tmp_path):
    write_jsonl(
        tmp_path,
        "a.jsonl",
        [
            {"id": 1, "text": "Same TEXT here"},
            {"id": 2, "text": "same text HERE"},  # same normalized tokens
            {"id": 3, "text": "different"},
        ],
    )
    manifest = DatasetManifest.load(
        write_manifest(tmp_path, [{"name": "a", "path": "a.jsonl", "format": "jsonl"}])
    )
    units, report = ingest(manifest, tmp_path)
    assert report.total == 2
    assert report.dropped_duplicates == [("a:2", "a:1")]


def test_ingest_discourse_tags(tmp_path):
    write_jsonl(
        tmp_path,
        "a.jsonl",
        [{"id": 1, "text": "hi", "discourse_tags": [{"category": "IronicExpression", "span": None}]}],
    )
    manifest = DatasetManifest.load(
        write_manifest(tmp_path, [{"name": "a", "path": "a.jsonl", "format": "jsonl"}])
    )
    units, _ = ingest(manifest, tmp_path)
    assert units[0].discourse_tags[0].category == "IronicExpression"


def test_ingest_rejects_bad_tag_category(tmp_path):
    write_jsonl(
        tmp_path,
        "a.jsonl",
        [{"id": 1, "text": "hi", "discourse_tags": ["Nope"]}],
    )
    manifest = DatasetManifest.load(
        write_manifest(tmp_path, [{"name": "a", "path": "a.jsonl", "format": "jsonl"}])
    )
    with pytest.raises(CorpusError, match="Nope"):
        ingest(manifest, tmp_path)


def test_corpus_save_load_round_trip(tmp_path):
    units = [
        TextUnit.from_raw("a:1", "Hello there &#128514;", source="a"),
        TextUnit.from_raw("a:2", "Second one", source="a"),
    ]
    path = tmp_path / "corpus.jsonl"
    save_corpus(units, path)
    loaded = load_corpus(path)
    assert loaded == units


# --- store -----------------------------------------------------------------


def rec(uid, annotator="a", di=0, ag=0, created_at=0.0, **kw):
    from prescribe.core import verdict

    return AnnotationRecord(
        unit_id=uid,
        annotator=annotator,
        toxic=verdict(di, ag),
        di=DiLabel(di),
        ag=AgLevel(ag),
        created_at=created_at,
        **kw,
    )


def test_store_append_and_reload(tmp_path):
    path = tmp_path / "store.jsonl"
    store = AnnotationStore(path)
    store.append(rec("u1"))
    store.append(rec("u2", di=1, ag=2))
    reopened = AnnotationStore(path)
    assert len(reopened) == 2
    assert reopened.latest("u2", "a").toxic is True


def test_store_latest_wins_by_timestamp_then_seq(tmp_path):
    store = AnnotationStore(tmp_path / "s.jsonl")
    store.append(rec("u1", created_at=5.0))
    store.append(rec("u1", di=1, ag=1, created_at=5.0))  # same ts, later seq
    assert store.latest("u1", "a").toxic is True
    store.append(rec("u1", created_at=1.0))  # older timestamp never wins
    assert store.latest("u1", "a").toxic is True


def test_store_is_append_only_on_disk(tmp_path):
    path = tmp_path / "s.jsonl"
    store = AnnotationStore(path)
    store.append(rec("u1"))
    before = path.read_text()
    store.append(rec("u2"))
    assert path.read_text().startswith(before)


def test_record_serialization_round_trip():
    record = AnnotationRecord(
        unit_id="u",
        annotator="gpt:prescriptive",
        toxic=True,
        di=DiLabel.TARGETED,
        ag=AgLevel.INTENSE,
        ag_score=1.5,
        di_alternates=frozenset({DiLabel.NOT_TARGETED}),
        findings=(
            AggressionFinding(ItemName.AGGRESSIVE_VERB_PHRASE, (0, 4), FindingRole.AI),
            AggressionFinding(ItemName.IMPERATIVE, None, FindingRole.AC),
        ),
        created_at=123.5,
        mode="prescriptive",
        notes="check me",
    )
    assert record_from_dict(record_to_dict(record)) == record


def test_export_analysis_round_trip(tmp_path):
    store = AnnotationStore(tmp_path / "s.jsonl")
    originals = [rec("u1"), rec("u2", di=1, ag=1), rec("u3", annotator="b", di=1, ag=2)]
    for r in originals:
        store.append(r)
    out = tmp_path / "analysis.jsonl"
    count = export_analysis(store, out)
    assert count == 3
    assert import_analysis(out) == originals


def test_export_training_filters_annotator(tmp_path):
    store = AnnotationStore(tmp_path / "s.jsonl")
    units = [TextUnit.from_raw(f"u{i}", f"text {i}") for i in range(3)]
    store.append(rec("u0", annotator="x", di=1, ag=1))
    store.append(rec("u1", annotator="x", di=0, ag=0))
    store.append(rec("u1", annotator="y", di=1, ag=2))
    out = tmp_path / "train.jsonl"
    count = export_training(store, units, out, annotator="x")
    assert count == 2
    lines = [json.loads(l) for l in out.read_text().splitlines()]
    assert lines[0] == {"text": "text 0", "di": 1, "ag": 1, "toxic": True}


def test_export_unknown_annotator_lists_available(tmp_path):
    store = AnnotationStore(tmp_path / "s.jsonl")
    store.append(rec("u1", annotator="present"))
    with pytest.raises(CorpusError, match="present"):
        export_training(store, [], tmp_path / "t.jsonl", annotator="absent")


def test_tampered_store_record_rejected_on_load(tmp_path):
    path = tmp_path / "s.jsonl"
    store = AnnotationStore(path)
    store.append(rec("u1", di=1, ag=1))
    tampered = path.read_text().replace('"toxic": true', '"toxic": false')
    path.write_text(tampered)
    with pytest.raises(ValueError, match="inconsistent"):
        AnnotationStore(path)  # consistency is checked at construction


def test_rerunning_pipeline_only_appends(tmp_path):
    path = tmp_path / "s.jsonl"
    store = AnnotationStore(path)
    store.append(rec("u1"))
    first = path.read_text()
    # a rerun appends a revision; the original line is untouched
    store.append(rec("u1", di=1, ag=1, created_at=1.0, revision=True))
    content = path.read_text()
    assert content.startswith(first)
    assert len(content.splitlines()) == 2
