"""Prescriptive offensive-language annotation toolkit.

Rule-based aggression scoring and direction-of-intent labeling under a
fixed codebook, toxicity verdicts, inter-annotator reliability
statistics, LLM-driven annotation with replayable transports, corpus
ingestion/export, and an annotation workbench service.
"""

from prescribe.core import AgLevel, AnnotationRecord, DiLabel, level_for_score, verdict
from prescribe.text import TextUnit, normalize

__all__ = [
    "AgLevel",
    "AnnotationRecord",
    "DiLabel",
    "TextUnit",
    "level_for_score",
    "normalize",
    "verdict",
]

__version__ = "0.1.0"
