"""HTTP API powering the human annotation workbench.

Task assignment walks the corpus in fixed order per annotator;
suggestions from the rule engine ride along as advisory payload and are
never persisted as human labels. Submitted annotations are recomputed
server-side: the stored score, level and verdict always come from the
engine's rules applied to the submitted findings, so a client cannot
persist an inconsistent record. Reliability statistics are served live
from the current store.
"""

from __future__ import annotations

import time
from pathlib import Path
from typing import Sequence

import json

from fastapi import FastAPI, Header, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from prescribe.aggression import AggressionFinding, score as score_findings
from prescribe.core import AnnotationRecord, DiLabel, check_score, level_for_score, verdict
from prescribe.corpus import AnnotationStore, record_to_dict
from prescribe.agreement import AlignmentError, LabelKind, render_report, report_pair
from prescribe.lexicon import Lexicon, LexiconError, parse_category
from prescribe.pipeline import di_evidence
from prescribe.text import TextUnit


class SubmittedFinding(BaseModel):
    category: str
    span: tuple[int, int] | None = None


class AnnotationSubmission(BaseModel):
    unit_id: str
    annotator: str
    di: int = Field(ge=0, le=1)
    di_alternates: list[int] = Field(default_factory=list)
    ag_findings: list[SubmittedFinding] | None = None
    ag_score: float | None = None
    notes: str = ""


def _assist_payload(unit: TextUnit, lexicon: Lexicon) -> dict:
    result, di = di_evidence(unit, lexicon)
    return {
        "advisory": True,
        "findings": [
            {
                "category": f.category.value,
                "span": list(f.span) if f.span else None,
                "role": f.role.value,
                "weight": f.weight,
            }
            for f in result.findings
        ],
        "score": result.score,
        "level": int(result.level),
        "di_suggestion": int(di.primary),
        "di_alternates": sorted(int(a) for a in di.alternates),
        "di_evidence": [
            {"rule": rule, "span": list(span)} for rule, span in di.evidence
        ],
    }


def create_app(
    units: Sequence[TextUnit],
    lexicon: Lexicon,
    store: AnnotationStore,
    annotator_tokens: dict[str, str] | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    """Build the workbench API over a corpus, lexicon and store.

    ``annotator_tokens`` maps annotator ids to bearer tokens; None runs
    in open mode (local development, no auth, any annotator id).
    """
    app = FastAPI(title="prescribe annotation service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    unit_order = {u.id: i for i, u in enumerate(units)}
    unit_by_id = {u.id: u for u in units}

    def check_auth(annotator: str, authorization: str | None) -> None:
        if annotator_tokens is None:
            return
        if annotator not in annotator_tokens:
            raise HTTPException(status_code=404, detail=f"unknown annotator {annotator!r}")
        expected = f"Bearer {annotator_tokens[annotator]}"
        if authorization != expected:
            raise HTTPException(status_code=401, detail="bad or missing bearer token")

    def get_unit(unit_id: str) -> TextUnit:
        unit = unit_by_id.get(unit_id)
        if unit is None:
            raise HTTPException(status_code=404, detail=f"unknown unit {unit_id!r}")
        return unit

    @app.get("/api/tasks/next")
    def next_task(
        annotator: str = Query(...),
        authorization: str | None = Header(default=None),
    ):
        check_auth(annotator, authorization)
        for unit in units:
            if not store.has(unit.id, annotator):
                done_by = [
                    ann for ann in store.annotators() if store.has(unit.id, ann)
                ]
                return {
                    "done": False,
                    "unit_id": unit.id,
                    "text": unit.raw,
                    "position": unit_order[unit.id] + 1,
                    "total": len(units),
                    "status": {"pending": True, "done_by": done_by},
                    "assist": _assist_payload(unit, lexicon),
                }
        return {"done": True, "total": len(units)}

    @app.get("/api/assist")
    def assist(unit_id: str = Query(...)):
        unit = get_unit(unit_id)
        return {"unit_id": unit.id, **_assist_payload(unit, lexicon)}

    @app.post("/api/annotations")
    def submit(
        submission: AnnotationSubmission,
        authorization: str | None = Header(default=None),
    ):
        check_auth(submission.annotator, authorization)
        unit = get_unit(submission.unit_id)

        if submission.ag_findings is not None:
            try:
                findings = [
                    AggressionFinding(
                        parse_category(f.category),
                        tuple(f.span) if f.span else None,
                        _provisional(parse_category(f.category)),
                    )
                    for f in submission.ag_findings
                ]
            except LexiconError as exc:
                raise HTTPException(
                    status_code=422,
                    detail=[{"loc": ["body", "ag_findings", "category"], "msg": str(exc)}],
                ) from None
            result = score_findings(findings)
            ag_score, level, stored = result.score, result.level, result.findings
        elif submission.ag_score is not None:
            try:
                ag_score = check_score(submission.ag_score)
            except ValueError as exc:
                raise HTTPException(
                    status_code=422,
                    detail=[{"loc": ["body", "ag_score"], "msg": str(exc)}],
                ) from None
            level, stored = level_for_score(ag_score), ()
        else:
            raise HTTPException(
                status_code=422,
                detail=[{"loc": ["body"], "msg": "ag_findings or ag_score required"}],
            )

        di = DiLabel(submission.di)
        toxic = verdict(di, level)  # server-computed, client values never trusted
        revision = store.has(submission.unit_id, submission.annotator)
        record = AnnotationRecord(
            unit_id=submission.unit_id,
            annotator=submission.annotator,
            toxic=toxic,
            di=di,
            ag=level,
            ag_score=ag_score,
            di_alternates=frozenset(
                DiLabel(a) for a in submission.di_alternates if a in (0, 1)
            )
            - {di},
            findings=tuple(stored),
            created_at=time.time(),
            mode="human",
            notes=submission.notes,
            revision=revision,
        )
        store.append(record)
        return {
            "record": record_to_dict(record),
            "computed": {"score": ag_score, "level": int(level), "toxic": toxic},
            "revision": revision,
        }

    @app.get("/api/agreement")
    def agreement(pair: str = Query(...), kind: str = Query("Toxicity")):
        names = [p.strip() for p in pair.split(",")]
        if len(names) != 2 or not all(names):
            raise HTTPException(status_code=422, detail="pair must be 'A,B'")
        try:
            label_kind = LabelKind(kind)
        except ValueError:
            raise HTTPException(
                status_code=422,
                detail=f"unknown kind {kind!r}; valid: {[k.value for k in LabelKind]}",
            ) from None
        a = list(store.latest_for_annotator(names[0]).values())
        b = list(store.latest_for_annotator(names[1]).values())
        if not a or not b:
            missing = names[0] if not a else names[1]
            return {"insufficient_data": True, "reason": f"no records for {missing!r}"}
        try:
            report = report_pair(a, b, label_kind, (names[0], names[1]))
        except AlignmentError as exc:
            return {"insufficient_data": True, "reason": str(exc)}
        return json.loads(render_report(report, "jsonl"))

    @app.get("/api/annotators")
    def annotators():
        registered = sorted(annotator_tokens) if annotator_tokens else []
        return {"registered": registered, "in_store": store.annotators()}

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="workbench")

    return app


def _provisional(category):
    from prescribe.aggression import FindingRole
    from prescribe.lexicon import ItemKind

    return FindingRole.AI if category.kind == ItemKind.AI else FindingRole.AC
