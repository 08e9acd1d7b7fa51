"""Corpus ingestion, the append-only annotation store, and exports.

Source datasets arrive as CSV or JSON-lines with per-source column
adapters declared in a manifest; units are normalized on load, counted
against the manifest's expectations, and deduplicated by normalized
text hash. Annotations live in a single JSON-lines log that is only
ever appended to; the latest record per (unit, annotator) wins by
timestamp then sequence number.
"""

from __future__ import annotations

import csv
import hashlib
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from prescribe.aggression import AggressionFinding, FindingRole
from prescribe.core import AgLevel, AnnotationRecord, DiLabel
from prescribe.lexicon import parse_category
from prescribe.text import DiscourseTag, TextUnit


class CorpusError(ValueError):
    """Bad input data: missing files, malformed rows, count mismatches."""


# --- manifest and ingestion ---------------------------------------------------


@dataclass(frozen=True)
class SourceSpec:
    name: str
    path: str
    format: str  # "csv" or "jsonl"
    expected_count: int | None = None
    columns: dict = field(default_factory=dict)  # {"id": ..., "text": ..., "discourse_tags": ...}

    @property
    def id_column(self) -> str:
        return self.columns.get("id", "id")

    @property
    def text_column(self) -> str:
        return self.columns.get("text", "text")

    @property
    def tags_column(self) -> str:
        return self.columns.get("discourse_tags", "discourse_tags")


@dataclass(frozen=True)
class DatasetManifest:
    sources: tuple[SourceSpec, ...]

    @classmethod
    def load(cls, path: str | Path) -> "DatasetManifest":
        path = Path(path)
        if not path.exists():
            raise CorpusError(f"manifest not found: {path}")
        data = json.loads(path.read_text(encoding="utf-8"))
        sources = []
        for i, raw in enumerate(data.get("sources", [])):
            try:
                sources.append(
                    SourceSpec(
                        name=raw["name"],
                        path=raw["path"],
                        format=raw.get("format", "jsonl"),
                        expected_count=raw.get("expected_count"),
                        columns=raw.get("columns", {}),
                    )
                )
            except KeyError as exc:
                raise CorpusError(f"manifest source #{i}: missing field {exc}") from None
        if not sources:
            raise CorpusError(f"manifest {path} declares no sources")
        for spec in sources:
            if spec.format not in ("csv", "jsonl"):
                raise CorpusError(f"source {spec.name}: unknown format {spec.format!r}")
        return cls(tuple(sources))


@dataclass
class IngestReport:
    per_source: list[tuple[str, int]] = field(default_factory=list)
    dropped_duplicates: list[tuple[str, str]] = field(default_factory=list)  # (dropped id, kept id)
    total: int = 0

    def summary(self) -> str:
        lines = [f"{name}: {count} units" for name, count in self.per_source]
        lines.append(f"duplicates dropped: {len(self.dropped_duplicates)}")
        lines.append(f"total: {self.total}")
        return "\n".join(lines)


def _parse_tags(value) -> tuple[DiscourseTag, ...]:
    if not value:
        return ()
    if isinstance(value, str):
        value = json.loads(value)
    tags = []
    for item in value:
        if isinstance(item, str):
            tags.append(DiscourseTag(item, None))
        else:
            span = item.get("span")
            tags.append(DiscourseTag(item["category"], tuple(span) if span else None))
    for tag in tags:
        parse_category(tag.category)  # validate early, errors name the culprit
    return tuple(tags)


def _load_source(spec: SourceSpec, root: Path) -> list[TextUnit]:
    path = root / spec.path
    if not path.exists():
        raise CorpusError(f"source {spec.name}: file not found: {path}")
    units: list[TextUnit] = []
    if spec.format == "csv":
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or spec.id_column not in reader.fieldnames:
                raise CorpusError(
                    f"source {spec.name}: column {spec.id_column!r} not in header "
                    f"{reader.fieldnames}"
                )
            if spec.text_column not in reader.fieldnames:
                raise CorpusError(
                    f"source {spec.name}: column {spec.text_column!r} not in header "
                    f"{reader.fieldnames}"
                )
            for lineno, row in enumerate(reader, start=2):
                text = row.get(spec.text_column)
                unit_id = row.get(spec.id_column)
                if text is None or unit_id in (None, ""):
                    raise CorpusError(f"{path}:{lineno}: missing id or text")
                units.append(
                    TextUnit.from_raw(f"{spec.name}:{unit_id}", text, source=spec.name)
                )
    else:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
                if spec.id_column not in row or spec.text_column not in row:
                    raise CorpusError(
                        f"{path}:{lineno}: missing {spec.id_column!r} or {spec.text_column!r}"
                    )
                try:
                    tags = _parse_tags(row.get(spec.tags_column))
                except ValueError as exc:
                    raise CorpusError(f"{path}:{lineno}: {exc}") from None
                units.append(
                    TextUnit.from_raw(
                        f"{spec.name}:{row[spec.id_column]}",
                        str(row[spec.text_column]),
                        source=spec.name,
                        discourse_tags=tags,
                    )
                )
    return units


def normalized_text_hash(unit: TextUnit) -> str:
    joined = "".join(t.surface for t in unit.tokens)
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()


def ingest(
    manifest: DatasetManifest, root: str | Path = "."
) -> tuple[list[TextUnit], IngestReport]:
    """Load every source, verify counts, merge and dedup.

    Deterministic: sources load in manifest order, rows in file order,
    first occurrence of a duplicate normalized text wins. Expected-count
    mismatches are hard errors.
    """
    root = Path(root)
    report = IngestReport()
    merged: list[TextUnit] = []
    seen_hash: dict[str, str] = {}
    seen_ids: set[str] = set()
    for spec in manifest.sources:
        units = _load_source(spec, root)
        if spec.expected_count is not None and len(units) != spec.expected_count:
            raise CorpusError(
                f"source {spec.name}: expected {spec.expected_count} units, "
                f"loaded {len(units)}"
            )
        report.per_source.append((spec.name, len(units)))
        for unit in units:
            if unit.id in seen_ids:
                raise CorpusError(f"duplicate unit id {unit.id!r}")
            seen_ids.add(unit.id)
            digest = normalized_text_hash(unit)
            if digest in seen_hash:
                report.dropped_duplicates.append((unit.id, seen_hash[digest]))
                continue
            seen_hash[digest] = unit.id
            merged.append(unit)
    report.total = len(merged)
    return merged, report


# --- corpus persistence ---------------------------------------------------------


def save_corpus(units: Iterable[TextUnit], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for unit in units:
            fh.write(
                json.dumps(
                    {
                        "id": unit.id,
                        "text": unit.raw,
                        "source": unit.source,
                        "discourse_tags": [
                            {"category": t.category, "span": list(t.span) if t.span else None}
                            for t in unit.discourse_tags
                        ],
                    },
                    sort_keys=True,
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_corpus(path: str | Path) -> list[TextUnit]:
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus not found: {path} (run ingest first)")
    units = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            units.append(
                TextUnit.from_raw(
                    row["id"],
                    row["text"],
                    source=row.get("source", ""),
                    discourse_tags=_parse_tags(row.get("discourse_tags")),
                )
            )
    return units


# --- record serialization -------------------------------------------------------


def record_to_dict(record: AnnotationRecord) -> dict:
    return {
        "unit_id": record.unit_id,
        "annotator": record.annotator,
        "mode": record.mode,
        "di": None if record.di is None else int(record.di),
        "di_alternates": sorted(int(x) for x in record.di_alternates),
        "ag": None if record.ag is None else int(record.ag),
        "ag_score": record.ag_score,
        "toxic": record.toxic,
        "findings": [
            {
                "category": f.category.value,
                "span": list(f.span) if f.span else None,
                "role": f.role.value,
                "weight": f.weight,
            }
            for f in record.findings
        ],
        "created_at": record.created_at,
        "notes": record.notes,
        "revision": record.revision,
    }


def record_from_dict(data: dict) -> AnnotationRecord:
    findings = tuple(
        AggressionFinding(
            category=parse_category(f["category"]),
            span=tuple(f["span"]) if f.get("span") else None,
            role=FindingRole(f["role"]),
        )
        for f in data.get("findings", [])
    )
    return AnnotationRecord(
        unit_id=data["unit_id"],
        annotator=data["annotator"],
        toxic=bool(data["toxic"]),
        di=None if data.get("di") is None else DiLabel(data["di"]),
        ag=None if data.get("ag") is None else AgLevel(data["ag"]),
        ag_score=data.get("ag_score"),
        di_alternates=frozenset(DiLabel(x) for x in data.get("di_alternates", [])),
        findings=findings,
        created_at=data.get("created_at", 0.0),
        mode=data.get("mode", "prescriptive"),
        notes=data.get("notes", ""),
        revision=bool(data.get("revision", False)),
    )


# --- the append-only store -------------------------------------------------------


class AnnotationStore:
    """Append-only JSON-lines record log with a latest-record index.

    Records are never mutated; re-running a pipeline only appends.
    Latest-wins resolution orders by (created_at, seq). A single writer
    is assumed per store file; appends are serialized with a lock so the
    service can share one store across request handlers.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: list[AnnotationRecord] = []
        self._seqs: list[int] = []
        self._latest: dict[tuple[str, str], tuple[float, int, AnnotationRecord]] = {}
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        data = json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise CorpusError(
                            f"{self.path}:{lineno}: invalid JSON ({exc.msg})"
                        ) from None
                    self._index(record_from_dict(data), data.get("seq", lineno))

    def _index(self, record: AnnotationRecord, seq: int) -> None:
        self._records.append(record)
        self._seqs.append(seq)
        key = (record.unit_id, record.annotator)
        current = self._latest.get(key)
        candidate = (record.created_at, seq, record)
        if current is None or candidate[:2] >= current[:2]:
            self._latest[key] = candidate

    def append(self, record: AnnotationRecord) -> AnnotationRecord:
        with self._lock:
            seq = (self._seqs[-1] + 1) if self._seqs else 1
            payload = record_to_dict(record)
            payload["seq"] = seq
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(payload, sort_keys=True, ensure_ascii=False) + "\n")
            self._index(record, seq)
        return record

    def __len__(self) -> int:
        return len(self._records)

    def records(self) -> Iterator[AnnotationRecord]:
        return iter(self._records)

    def annotators(self) -> list[str]:
        return sorted({r.annotator for r in self._records})

    def has(self, unit_id: str, annotator: str) -> bool:
        return (unit_id, annotator) in self._latest

    def latest(self, unit_id: str, annotator: str) -> AnnotationRecord | None:
        entry = self._latest.get((unit_id, annotator))
        return entry[2] if entry else None

    def latest_for_annotator(self, annotator: str) -> dict[str, AnnotationRecord]:
        return {
            uid: entry[2]
            for (uid, ann), entry in self._latest.items()
            if ann == annotator
        }


# --- exports ----------------------------------------------------------------------


def export_analysis(
    store: AnnotationStore, out_path: str | Path, annotator: str | None = None
) -> int:
    """Full-record JSON-lines export; returns the line count."""
    if annotator is not None:
        _require_annotator(store, annotator)
    count = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for record in store.records():
            if annotator is not None and record.annotator != annotator:
                continue
            fh.write(json.dumps(record_to_dict(record), sort_keys=True, ensure_ascii=False) + "\n")
            count += 1
    return count


def import_analysis(path: str | Path) -> list[AnnotationRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(record_from_dict(json.loads(line)))
    return records


def export_training(
    store: AnnotationStore,
    units: Iterable[TextUnit],
    out_path: str | Path,
    annotator: str,
) -> int:
    """(text, di, ag, toxic) JSON-lines using the latest record per unit."""
    _require_annotator(store, annotator)
    latest = store.latest_for_annotator(annotator)
    count = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for unit in units:
            record = latest.get(unit.id)
            if record is None:
                continue
            fh.write(
                json.dumps(
                    {
                        "text": unit.raw,
                        "di": None if record.di is None else int(record.di),
                        "ag": None if record.ag is None else int(record.ag),
                        "toxic": record.toxic,
                    },
                    sort_keys=True,
                    ensure_ascii=False,
                )
                + "\n"
            )
            count += 1
    return count


def _require_annotator(store: AnnotationStore, annotator: str) -> None:
    known = store.annotators()
    if annotator not in known:
        raise CorpusError(
            f"annotator {annotator!r} not in store; available: {', '.join(known) or '(none)'}"
        )


# --- external label files ----------------------------------------------------------


def load_label_streams(path: str | Path) -> dict[str, dict[str, int]]:
    """Load per-annotator label columns from a CSV file.

    The file needs an ``id`` column (or its first column is used as the
    id); every other column is a label stream keyed by that id. Blank
    cells are skipped. For any stream pair named ``<X>DI_C`` and
    ``<X>AG_C`` without an explicit ``<X>T_C``, the toxicity stream is
    derived through the verdict, matching how per-annotator toxicity
    labels are defined.
    """
    from prescribe.core import verdict

    path = Path(path)
    if not path.exists():
        raise CorpusError(f"label file not found: {path}")
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames:
            raise CorpusError(f"{path}: empty file")
        id_column = "id" if "id" in reader.fieldnames else reader.fieldnames[0]
        streams: dict[str, dict[str, int]] = {
            name: {} for name in reader.fieldnames if name != id_column
        }
        for lineno, row in enumerate(reader, start=2):
            uid = row[id_column]
            for name in streams:
                cell = (row.get(name) or "").strip()
                if cell == "":
                    continue
                try:
                    streams[name][uid] = int(float(cell))
                except ValueError:
                    raise CorpusError(
                        f"{path}:{lineno}: non-numeric label {cell!r} in column {name}"
                    ) from None
    for name in list(streams):
        if name.endswith("DI_C"):
            prefix = name[: -len("DI_C")]
            ag_name, t_name = f"{prefix}AG_C", f"{prefix}T_C"
            if ag_name in streams and t_name not in streams:
                di_s, ag_s = streams[name], streams[ag_name]
                streams[t_name] = {
                    uid: int(verdict(di_s[uid], min(ag_s[uid], 2)))
                    for uid in di_s.keys() & ag_s.keys()
                }
    return streams
