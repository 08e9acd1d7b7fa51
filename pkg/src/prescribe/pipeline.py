"""Rule-engine annotation: detection, scoring, intent and verdict in one pass."""

from __future__ import annotations

from prescribe.aggression import analyze
from prescribe.core import AnnotationRecord, verdict
from prescribe.intent import classify_di
from prescribe.lexicon import Lexicon
from prescribe.text import TextUnit

ENGINE_ANNOTATOR = "engine"


def annotate_with_engine(
    unit: TextUnit,
    lexicon: Lexicon,
    annotator: str = ENGINE_ANNOTATOR,
    created_at: float = 0.0,
) -> AnnotationRecord:
    """Produce one fully auditable record for a unit from the rule engine."""
    result = analyze(unit, lexicon)
    di = classify_di(unit, result.findings)
    return AnnotationRecord(
        unit_id=unit.id,
        annotator=annotator,
        toxic=verdict(di.primary, result.level),
        di=di.primary,
        ag=result.level,
        ag_score=result.score,
        di_alternates=di.alternates,
        findings=result.findings,
        created_at=created_at,
        mode="engine",
    )


def di_evidence(unit: TextUnit, lexicon: Lexicon):
    """Findings plus intent evidence, for assist surfaces."""
    result = analyze(unit, lexicon)
    di = classify_di(unit, result.findings)
    return result, di
