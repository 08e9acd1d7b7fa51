"""Core label domains and the toxicity combinator.

A piece of text is toxic exactly when its language is directed at
others (DI = 1) and carries aggression (AG in {1, 2}). Everything else
in the toolkit exists to produce or audit those two labels.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import TYPE_CHECKING

if TYPE_CHECKING:  # pragma: no cover
    from prescribe.aggression import AggressionFinding


class DiLabel(IntEnum):
    """Direction of intent: 1 targets other people, 0 everything else."""

    NOT_TARGETED = 0
    TARGETED = 1


class AgLevel(IntEnum):
    """Aggression level: none, mild, intense."""

    NONE = 0
    MILD = 1
    INTENSE = 2


def verdict(di: DiLabel | int, ag: AgLevel | int) -> bool:
    """Toxicity verdict: true iff di = 1 and ag in {1, 2}."""
    return DiLabel(di) == DiLabel.TARGETED and AgLevel(ag) in (
        AgLevel.MILD,
        AgLevel.INTENSE,
    )


def check_score(value: float) -> float:
    """Validate a relative aggression score: non-negative, half-point steps."""
    if value < 0:
        raise ValueError(f"aggression score must be non-negative, got {value}")
    if (value * 2) != int(value * 2):
        raise ValueError(f"aggression score must be a multiple of 0.5, got {value}")
    return float(value)


def level_for_score(score: float) -> AgLevel:
    """Map a relative aggression score to its level.

    0 -> NONE; (0, 1] -> MILD; (1, inf) -> INTENSE.
    """
    score = check_score(score)
    if score == 0:
        return AgLevel.NONE
    if score <= 1:
        return AgLevel.MILD
    return AgLevel.INTENSE


@dataclass(frozen=True)
class AnnotationRecord:
    """One annotator's labels for one unit, human, model or engine.

    ``di``/``ag`` are None for descriptive annotations, which assign
    toxicity directly without the two-component breakdown. Whenever both
    labels are present the toxicity consistency invariant is enforced at
    construction rather than trusted from input.
    """

    unit_id: str
    annotator: str
    toxic: bool
    di: DiLabel | None = None
    ag: AgLevel | None = None
    ag_score: float | None = None
    di_alternates: frozenset[DiLabel] = frozenset()
    findings: tuple["AggressionFinding", ...] = ()
    created_at: float = 0.0
    mode: str = "prescriptive"
    notes: str = ""
    revision: bool = False

    def __post_init__(self) -> None:
        if (self.di is None) != (self.ag is None):
            raise ValueError("di and ag must both be set or both be absent")
        if self.di is not None and self.ag is not None:
            if self.toxic != verdict(self.di, self.ag):
                raise ValueError(
                    f"toxic={self.toxic} inconsistent with di={self.di} ag={self.ag}"
                )
            if self.ag_score is not None and level_for_score(self.ag_score) != self.ag:
                raise ValueError(
                    f"ag={int(self.ag)} inconsistent with score {self.ag_score} "
                    "under the level mapping"
                )
        if self.di is not None and self.di in self.di_alternates:
            raise ValueError("di_alternates must exclude the primary label")
        if self.ag_score is not None:
            check_score(self.ag_score)
