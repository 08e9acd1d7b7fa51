"""LLM annotation driver: single units and resumable concurrent batches.

Responses are parsed with a tolerant key:value extractor (first matching
key wins). A transport failure retries a bounded number of times; an
unparseable response earns exactly one reprompt carrying a format
reminder, after which the unit is marked unparseable with its raw text
kept. The model's aggression *score* is taken at its word (rounded to
the half-point grid), but the aggression *level* is always recomputed
locally from that score; whatever level the model claims is recorded
for audit only.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Sequence

from prescribe.aggression import AggressionFinding, resolve_roles
from prescribe.core import AnnotationRecord, DiLabel, level_for_score, verdict
from prescribe.corpus import AnnotationStore
from prescribe.lexicon import ItemName
from prescribe.llm.templates import (
    PromptKind,
    TemplateSet,
    build_prompt,
    fingerprint,
)
from prescribe.llm.transport import RateLimiter, Transport, TransportError
from prescribe.text import TextUnit

FORMAT_REMINDER = (
    "Your previous answer did not follow the required format. "
    "Reply again using exactly the key: value lines requested, nothing else."
)


@dataclass(frozen=True)
class LlmConfig:
    model: str
    temperature: float = 0.0
    max_attempts: int = 3
    backoff: float = 0.5

    def annotator_id(self, mode: str) -> str:
        return f"{self.model}:{mode}"


@dataclass
class LlmRunRecord:
    unit_id: str
    kind: str
    fingerprint: str
    model: str
    response: str | None
    parsed: bool
    retries: int
    created_at: float = 0.0

    def to_dict(self) -> dict:
        return {
            "unit_id": self.unit_id,
            "kind": self.kind,
            "fingerprint": self.fingerprint,
            "model": self.model,
            "response": self.response,
            "parsed": self.parsed,
            "retries": self.retries,
            "created_at": self.created_at,
        }


@dataclass
class UnitOutcome:
    unit: TextUnit
    status: str  # ok | failed | unparseable
    di: int | None = None
    di_alternates: tuple[int, ...] = ()
    items: tuple[ItemName, ...] = ()
    score: float | None = None
    claimed_level: int | None = None
    toxic_label: bool | None = None
    runs: list[LlmRunRecord] = field(default_factory=list)


@dataclass
class BatchSummary:
    total: int = 0
    skipped: int = 0
    succeeded: int = 0
    failed: int = 0
    unparseable: int = 0

    @property
    def attempted(self) -> int:
        return self.total - self.skipped

    @property
    def failure_ratio(self) -> float:
        if self.attempted == 0:
            return 0.0
        return (self.failed + self.unparseable) / self.attempted

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "skipped": self.skipped,
            "succeeded": self.succeeded,
            "failed": self.failed,
            "unparseable": self.unparseable,
        }


# --- tolerant key:value extraction ------------------------------------------


def _first_value(key: str, text: str) -> str | None:
    pattern = re.compile(rf"^[^\S\n]*{key}\s*:\s*(.+)$", re.IGNORECASE | re.MULTILINE)
    m = pattern.search(text)
    return m.group(1).strip() if m else None


def parse_di(text: str) -> tuple[int, tuple[int, ...]] | None:
    value = _first_value("DI", text)
    if value is None:
        return None
    m = re.search(r"[01]", value)
    if not m:
        return None
    primary = int(m.group(0))
    alternates: tuple[int, ...] = ()
    alt_value = _first_value("alternates", text)
    if alt_value:
        alternates = tuple(
            sorted({int(x) for x in re.findall(r"[01]", alt_value)} - {primary})
        )
    return primary, alternates


def parse_items(text: str) -> tuple[ItemName, ...] | None:
    value = _first_value("items", text)
    if value is None:
        return None
    valid = {name.value.lower(): name for name in ItemName}
    found = []
    for word in re.findall(r"[A-Za-z]+", value):
        name = valid.get(word.lower())
        if name is not None and name not in found:
            found.append(name)
    return tuple(found)


def parse_score(text: str) -> tuple[float, int | None] | None:
    value = _first_value("score", text)
    if value is None:
        return None
    m = re.search(r"-?\d+(?:\.\d+)?", value)
    if not m:
        return None
    raw = float(m.group(0))
    if raw < 0:
        return None
    score = int(raw * 2 + 0.5) / 2  # snap to the half-point grid
    claimed: int | None = None
    level_value = _first_value("level", text)
    if level_value:
        lm = re.search(r"[012]", level_value)
        claimed = int(lm.group(0)) if lm else None
    return score, claimed


def parse_label(text: str) -> bool | None:
    value = _first_value("label", text)
    if value is None:
        stripped = text.strip()
        value = stripped if stripped in ("0", "1") else None
    if value is None:
        return None
    m = re.search(r"[01]", value)
    return bool(int(m.group(0))) if m else None


_PARSERS: dict[PromptKind, Callable[[str], object]] = {
    PromptKind.DESCRIPTIVE: parse_label,
    PromptKind.PRESCRIPTIVE_DI: parse_di,
    PromptKind.PRESCRIPTIVE_AG_USAGE: parse_items,
    PromptKind.PRESCRIPTIVE_AG_SCORING: parse_score,
}


# --- single-unit annotation ---------------------------------------------------


def _ask(
    unit: TextUnit,
    kind: PromptKind,
    transport: Transport,
    templates: TemplateSet,
    config: LlmConfig,
    limiter: RateLimiter | None,
    sleep: Callable[[float], None],
    usage_answer: str | None = None,
) -> tuple[object | None, LlmRunRecord]:
    """One question with bounded transport retries and one reprompt."""
    payload = build_prompt(
        unit, kind, templates, config.model, config.temperature, usage_answer
    )
    parser = _PARSERS[kind]
    run = LlmRunRecord(
        unit_id=unit.id,
        kind=kind.value,
        fingerprint=fingerprint(payload),
        model=config.model,
        response=None,
        parsed=False,
        retries=0,
    )
    reprompted = False
    while True:
        response = None
        for attempt in range(config.max_attempts):
            try:
                if limiter is not None:
                    limiter.acquire()
                response = transport.complete(payload)
                break
            except TransportError:
                run.retries += 1
                if attempt + 1 >= config.max_attempts:
                    return None, run
                sleep(config.backoff * (attempt + 1))
        run.response = response
        parsed = parser(response)
        if parsed is not None:
            run.parsed = True
            return parsed, run
        if reprompted:
            return None, run
        reprompted = True
        payload = dict(payload)
        payload["messages"] = list(payload["messages"]) + [
            {"role": "assistant", "content": response},
            {"role": "user", "content": FORMAT_REMINDER},
        ]
        run.fingerprint = fingerprint(payload)


def run_unit(
    unit: TextUnit,
    mode: str,
    transport: Transport,
    templates: TemplateSet,
    config: LlmConfig,
    limiter: RateLimiter | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> UnitOutcome:
    """Issue the prompt sequence for one unit and collect the outcome."""
    outcome = UnitOutcome(unit=unit, status="ok")
    if mode == "descriptive":
        label, run = _ask(unit, PromptKind.DESCRIPTIVE, transport, templates, config, limiter, sleep)
        outcome.runs.append(run)
        if label is None:
            outcome.status = "failed" if run.response is None else "unparseable"
            return outcome
        outcome.toxic_label = bool(label)
        return outcome

    di, run = _ask(unit, PromptKind.PRESCRIPTIVE_DI, transport, templates, config, limiter, sleep)
    outcome.runs.append(run)
    if di is None:
        outcome.status = "failed" if run.response is None else "unparseable"
        return outcome
    outcome.di, outcome.di_alternates = di

    items, run = _ask(
        unit, PromptKind.PRESCRIPTIVE_AG_USAGE, transport, templates, config, limiter, sleep
    )
    outcome.runs.append(run)
    if items is None:
        outcome.status = "failed" if run.response is None else "unparseable"
        return outcome
    outcome.items = items
    usage_answer = f"items: [{', '.join(n.value for n in items)}]"

    score, run = _ask(
        unit,
        PromptKind.PRESCRIPTIVE_AG_SCORING,
        transport,
        templates,
        config,
        limiter,
        sleep,
        usage_answer=usage_answer,
    )
    outcome.runs.append(run)
    if score is None:
        outcome.status = "failed" if run.response is None else "unparseable"
        return outcome
    outcome.score, outcome.claimed_level = score
    return outcome


def outcome_to_record(
    outcome: UnitOutcome, annotator: str, mode: str, created_at: float
) -> AnnotationRecord:
    """Build the persisted record; the local level mapping is authoritative."""
    if mode == "descriptive":
        return AnnotationRecord(
            unit_id=outcome.unit.id,
            annotator=annotator,
            toxic=bool(outcome.toxic_label),
            created_at=created_at,
            mode=mode,
        )
    from prescribe.aggression import FindingRole
    from prescribe.lexicon import ItemKind

    findings = tuple(
        resolve_roles(
            [
                AggressionFinding(
                    name,
                    None,
                    FindingRole.AI if name.kind == ItemKind.AI else FindingRole.AC,
                )
                for name in outcome.items
            ]
        )
    )
    di = DiLabel(outcome.di)
    ag = level_for_score(outcome.score)
    return AnnotationRecord(
        unit_id=outcome.unit.id,
        annotator=annotator,
        toxic=verdict(di, ag),
        di=di,
        ag=ag,
        ag_score=outcome.score,
        di_alternates=frozenset(DiLabel(a) for a in outcome.di_alternates) - {di},
        findings=findings,
        created_at=created_at,
        mode=mode,
    )


def annotate_unit(
    unit: TextUnit,
    mode: str,
    transport: Transport,
    templates: TemplateSet | None = None,
    config: LlmConfig | None = None,
    clock: Callable[[], float] = time.time,
) -> tuple[AnnotationRecord | None, list[LlmRunRecord]]:
    """Annotate a single unit; returns (record or None, run records)."""
    from prescribe.llm.templates import load_templates

    templates = templates or load_templates()
    config = config or LlmConfig(model="mock-model")
    outcome = run_unit(unit, mode, transport, templates, config)
    now = clock()
    for run in outcome.runs:
        run.created_at = now
    if outcome.status != "ok":
        return None, outcome.runs
    record = outcome_to_record(outcome, config.annotator_id(mode), mode, now)
    return record, outcome.runs


# --- batch driver ---------------------------------------------------------------


def annotate_batch(
    units: Sequence[TextUnit],
    mode: str,
    transport: Transport,
    templates: TemplateSet,
    config: LlmConfig,
    store: AnnotationStore,
    run_log_path: str | Path | None = None,
    concurrency: int = 4,
    rate_limit_per_minute: int | None = None,
    clock: Callable[[], float] = time.time,
    sleep: Callable[[float], None] = time.sleep,
    limiter: RateLimiter | None = None,
) -> BatchSummary:
    """Annotate a corpus with bounded concurrency and per-minute rate cap.

    Results persist in corpus order, so an interrupted batch leaves an
    exact prefix behind; on rerun, units already in the store for this
    annotator are skipped. No prompt ever mixes units: each request
    carries exactly one unit's text.
    """
    if concurrency <= 0:
        raise ValueError("concurrency must be positive")
    annotator = config.annotator_id(mode)
    if limiter is None and rate_limit_per_minute:
        limiter = RateLimiter(rate_limit_per_minute, sleep=sleep)
    summary = BatchSummary(total=len(units))

    pending = [u for u in units if not store.has(u.id, annotator)]
    summary.skipped = len(units) - len(pending)

    run_log = open(run_log_path, "a", encoding="utf-8") if run_log_path else None
    executor = ThreadPoolExecutor(max_workers=concurrency)
    try:
        futures = [
            executor.submit(
                run_unit, unit, mode, transport, templates, config, limiter, sleep
            )
            for unit in pending
        ]
        for future in futures:
            outcome = future.result()
            now = clock()
            for run in outcome.runs:
                run.created_at = now
                if run_log:
                    run_log.write(
                        json.dumps(run.to_dict(), sort_keys=True, ensure_ascii=False) + "\n"
                    )
            if outcome.status == "ok":
                store.append(outcome_to_record(outcome, annotator, mode, now))
                summary.succeeded += 1
            elif outcome.status == "failed":
                summary.failed += 1
            else:
                summary.unparseable += 1
            if run_log:
                run_log.flush()
    finally:
        executor.shutdown(wait=False, cancel_futures=True)
        if run_log:
            run_log.close()
    return summary
