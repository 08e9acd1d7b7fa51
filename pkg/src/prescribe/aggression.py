"""Aggression detection and the relative scoring rules.

Findings come from three layers: lexical lexicon matches, syntactic
template rules (rhetorical questions, imperatives, strong-expression
cues) and discourse cues or externally supplied discourse tags. The
scorer then applies the codebook arithmetic: aggressive items weigh
1.0, catalyzers 0.5, each category counts once, catalyzers alone score
0, and false constructs become 0.5-point aggression bases only when a
catalyzer co-occurs. Levels: score 0 -> 0, (0, 1] -> 1, above 1 -> 2.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from prescribe.core import AgLevel, level_for_score
from prescribe.lexicon import (
    ItemKind,
    ItemName,
    Lexicon,
    LexiconMatch,
    parse_category,
)
from prescribe.lexicon import match as lexicon_match
from prescribe.text import TextUnit, sentence_ranges

NEGATION_TOKENS = frozenset(
    """not no never nothing nobody none nowhere ain't isn't aren't wasn't
    weren't don't doesn't didn't won't wouldn't can't cannot couldn't
    shouldn't mustn't hasn't haven't hadn't""".split()
)

UNIVERSAL_CUES = frozenset(
    "everyone everybody every all always anyone anybody anything everything".split()
)


class FindingRole(Enum):
    AI = "AI"
    AC = "AC"
    FALSE_CONSTRUCT_AS_AI = "FalseConstructAsAI"


@dataclass(frozen=True)
class AggressionFinding:
    """A detected aggressive item or catalyzer.

    ``span`` is a byte range into the unit's raw text, or None for
    whole-unit discourse findings. Weight follows the role: 1.0 for
    aggressive items, 0.5 otherwise.
    """

    category: ItemName
    span: tuple[int, int] | None
    role: FindingRole

    def __post_init__(self) -> None:
        if (
            self.role == FindingRole.FALSE_CONSTRUCT_AS_AI
            and self.category != ItemName.FALSE_CONSTRUCT
        ):
            raise ValueError("FalseConstructAsAI role requires FalseConstruct category")

    @property
    def weight(self) -> float:
        return 1.0 if self.role == FindingRole.AI else 0.5


@dataclass(frozen=True)
class AggressionResult:
    findings: tuple[AggressionFinding, ...]
    counted_categories: frozenset[ItemName]
    score: float
    level: AgLevel

    def __post_init__(self) -> None:
        total = sum(_category_weight(c) for c in self.counted_categories)
        if total != self.score:
            raise ValueError(f"score {self.score} != per-category sum {total}")
        if level_for_score(self.score) != self.level:
            raise ValueError(f"level {self.level} inconsistent with score {self.score}")


def _category_weight(category: ItemName) -> float:
    if category.kind == ItemKind.AI:
        return 1.0
    return 0.5  # AC, or a false construct promoted to an aggression base


def resolve_roles(findings: list[AggressionFinding]) -> list[AggressionFinding]:
    """Normalize roles from categories.

    AI/AC categories keep their kind's role. False constructs are
    promoted to 0.5-point aggression bases iff a catalyzer-kind finding
    co-occurs; otherwise they stay inert (recorded with catalyzer role,
    excluded from scoring).
    """
    has_catalyzer = any(f.category.kind == ItemKind.AC for f in findings)
    resolved = []
    for f in findings:
        if f.category.kind == ItemKind.AI:
            role = FindingRole.AI
        elif f.category.kind == ItemKind.AC:
            role = FindingRole.AC
        else:
            role = FindingRole.FALSE_CONSTRUCT_AS_AI if has_catalyzer else FindingRole.AC
        resolved.append(f if f.role == role else replace(f, role=role))
    return resolved


def score(findings: list[AggressionFinding]) -> AggressionResult:
    """Apply the codebook scoring rules to a finding list.

    Uniqueness: each category counts once. Override: no aggressive item
    (nor promoted false construct) means score 0 no matter how many
    catalyzers. Inert false constructs are kept in the findings for
    audit but never counted.
    """
    resolved = resolve_roles(list(findings))
    categories = {f.category for f in resolved}
    ai_cats = {c for c in categories if c.kind == ItemKind.AI}
    ac_cats = {c for c in categories if c.kind == ItemKind.AC}
    fc_as_base = ItemName.FALSE_CONSTRUCT in categories and bool(ac_cats)

    if not ai_cats and not fc_as_base:
        counted: frozenset[ItemName] = frozenset()
        total = 0.0
    else:
        counted_set = ai_cats | ac_cats
        if fc_as_base:
            counted_set.add(ItemName.FALSE_CONSTRUCT)
        counted = frozenset(counted_set)
        total = 1.0 * len(ai_cats) + 0.5 * len(ac_cats) + (0.5 if fc_as_base else 0.0)

    return AggressionResult(
        findings=tuple(resolved),
        counted_categories=counted,
        score=total,
        level=level_for_score(total),
    )


def detect(unit: TextUnit, lexicon: Lexicon) -> list[AggressionFinding]:
    """Detect aggressive items and catalyzers in a normalized unit.

    Lexical and discourse-cue categories fire wherever they match.
    Rhetorical questions fire once per question-mark sentence containing
    a negation, a universal cue, or an interrogative template match.
    Imperative cues fire only sentence-initially. Discourse tags on the
    unit are trusted as ground-truth findings.
    """
    matches = lexicon_match(unit, lexicon)
    sents = sentence_ranges(unit)
    findings: list[AggressionFinding] = []

    for m in matches:
        name = m.entry.category
        if name in (ItemName.RHETORICAL_QUESTION, ItemName.IMPERATIVE):
            continue  # handled by the sentence rules below
        findings.append(AggressionFinding(name, m.span, _provisional_role(name)))

    findings.extend(_rhetorical_questions(unit, sents, matches))
    findings.extend(_imperatives(unit, sents, matches))

    for tag in unit.discourse_tags:
        name = parse_category(tag.category)
        findings.append(AggressionFinding(name, tag.span, _provisional_role(name)))

    findings.sort(key=lambda f: (f.span is None, f.span or (0, 0), f.category.value))
    return resolve_roles(findings)


def _provisional_role(name: ItemName) -> FindingRole:
    return FindingRole.AI if name.kind == ItemKind.AI else FindingRole.AC


def _is_word(surface: str) -> bool:
    return bool(surface) and (surface[0].isalnum() or surface[0] == "@")


def _rhetorical_questions(
    unit: TextUnit, sents: list[tuple[int, int]], matches: list[LexiconMatch]
) -> list[AggressionFinding]:
    cue_ranges = [
        m.token_range for m in matches if m.entry.category == ItemName.RHETORICAL_QUESTION
    ]
    findings = []
    for a, b in sents:
        if not unit.tokens[b - 1].surface.startswith("?"):
            continue
        surfaces = {t.surface for t in unit.tokens[a:b]}
        has_cue = bool(surfaces & NEGATION_TOKENS) or bool(surfaces & UNIVERSAL_CUES)
        has_template = any(a <= lo and hi <= b for lo, hi in cue_ranges)
        if has_cue or has_template:
            span = (unit.tokens[a].start, unit.tokens[b - 1].end)
            findings.append(
                AggressionFinding(ItemName.RHETORICAL_QUESTION, span, FindingRole.AC)
            )
    return findings


def _imperatives(
    unit: TextUnit, sents: list[tuple[int, int]], matches: list[LexiconMatch]
) -> list[AggressionFinding]:
    findings = []
    for a, b in sents:
        first_word = next(
            (i for i in range(a, b) if _is_word(unit.tokens[i].surface)), None
        )
        if first_word is None:
            continue
        for m in matches:
            if (
                m.entry.category == ItemName.IMPERATIVE
                and m.token_range[0] == first_word
            ):
                findings.append(
                    AggressionFinding(ItemName.IMPERATIVE, m.span, FindingRole.AC)
                )
                break
    return findings


def analyze(unit: TextUnit, lexicon: Lexicon) -> AggressionResult:
    """Detect then score: the full aggression analysis of one unit."""
    return score(detect(unit, lexicon))
