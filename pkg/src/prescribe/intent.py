"""Direction-of-intent labeling with retained alternate readings.

The label is decided by an ordered rule cascade: second-person address
(outside quoted speech), @-mention or proper-noun adjacency to an
aggression finding, then demonstrative-targeted aggressive noun phrases
in non-self-referential clauses. When no rule fires the unit defaults
to 0 (self-directed, ironic or global statements). Because a piece may
shift targets between sentences, the losing reading is kept as an
alternate instead of being discarded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from prescribe.aggression import AggressionFinding
from prescribe.core import DiLabel
from prescribe.lexicon import ItemName
from prescribe.text import TextUnit, in_any_range, quoted_byte_ranges, sentence_ranges

SECOND_PERSON = frozenset(
    "you your yours you're youre yourself yourselves u ur y'all yall ya'll".split()
)

FIRST_PERSON = frozenset(
    "i i'm im i've ive me my mine myself we we're our ours us".split()
)

DEMONSTRATIVE_OTHERS = frozenset("those they that these them their".split())

IN_GROUP_POSSESSIVES = frozenset("my our".split())

CLAUSE_BREAKERS = frozenset("and but or".split())

RULE_SECOND_PERSON = "second-person"
RULE_MENTION_ADJACENCY = "mention-adjacency"
RULE_DEMONSTRATIVE_TARGET = "demonstrative-target"

_ADJACENCY_WINDOW = 3


@dataclass(frozen=True)
class DiResult:
    primary: DiLabel
    alternates: frozenset[DiLabel]
    evidence: tuple[tuple[str, tuple[int, int]], ...]

    def __post_init__(self) -> None:
        if self.primary in self.alternates:
            raise ValueError("alternates must exclude the primary label")
        if self.primary == DiLabel.TARGETED and not self.evidence:
            raise ValueError("a targeted label requires rule evidence")


def _is_mention(token_surface: str) -> bool:
    return token_surface.startswith("@") and len(token_surface) > 1


def _is_proper_noun(unit: TextUnit, idx: int, sentence_starts: set[int]) -> bool:
    """Capitalized in the raw surface and not sentence-initial."""
    tok = unit.tokens[idx]
    if idx in sentence_starts:
        return False
    surface = unit.span_text(tok.span)
    return surface[:1].isupper() and surface[1:].islower() and surface[:1].isalpha()


def _clause_bounds(unit: TextUnit, sent: tuple[int, int]) -> list[tuple[int, int]]:
    """Comma/conjunction-delimited clause ranges within one sentence."""
    bounds = []
    start = sent[0]
    for i in range(*sent):
        surface = unit.tokens[i].surface
        if surface[0] in ",;:" or surface in CLAUSE_BREAKERS:
            if start < i:
                bounds.append((start, i))
            start = i + 1
    if start < sent[1]:
        bounds.append((start, sent[1]))
    return bounds or [sent]


def classify_di(
    unit: TextUnit, findings: Sequence[AggressionFinding] = ()
) -> DiResult:
    """Assign the direction-of-intent label for one unit.

    ``findings`` are the unit's aggression findings; rules (b) and (c)
    are adjacency rules relative to them and never fire without any.
    """
    sents = sentence_ranges(unit)
    sentence_starts = {a for a, _ in sents}
    quoted = quoted_byte_ranges(unit.raw)
    evidence: list[tuple[str, tuple[int, int]]] = []
    fired_sentences: set[int] = set()

    spanned = [f for f in findings if f.span is not None]

    def sentence_of(byte_pos: int) -> int:
        for si, (a, b) in enumerate(sents):
            if unit.tokens[a].start <= byte_pos <= unit.tokens[b - 1].end:
                return si
        return -1

    # rule (a): second-person address outside quoted speech
    for i, tok in enumerate(unit.tokens):
        if tok.surface in SECOND_PERSON and not in_any_range(tok.span, quoted):
            evidence.append((RULE_SECOND_PERSON, tok.span))
            fired_sentences.add(sentence_of(tok.start))

    # rule (b): mention / proper noun within 3 tokens of an aggression finding
    for f in spanned:
        f_lo = next(
            (i for i, t in enumerate(unit.tokens) if t.end > f.span[0]), None
        )
        f_hi = next(
            (i for i in range(len(unit.tokens) - 1, -1, -1) if unit.tokens[i].start < f.span[1]),
            None,
        )
        if f_lo is None or f_hi is None:
            continue
        if f_lo > 0 and unit.tokens[f_lo - 1].surface in IN_GROUP_POSSESSIVES:
            continue  # in-group vocative ("my nigga") stays self-directed
        lo = max(0, f_lo - _ADJACENCY_WINDOW)
        hi = min(len(unit.tokens) - 1, f_hi + _ADJACENCY_WINDOW)
        for i in range(lo, hi + 1):
            tok = unit.tokens[i]
            if _is_mention(tok.surface) or _is_proper_noun(unit, i, sentence_starts):
                evidence.append((RULE_MENTION_ADJACENCY, tok.span))
                fired_sentences.add(sentence_of(tok.start))
                break

    # rule (c): demonstrative-targeted aggressive noun phrase in a
    # clause that is not self-referential
    for f in spanned:
        if f.category != ItemName.AGGRESSIVE_NOUN_DET_PHRASE:
            continue
        f_lo = next((i for i, t in enumerate(unit.tokens) if t.end > f.span[0]), None)
        if f_lo is None or f_lo == 0:
            continue
        prev = unit.tokens[f_lo - 1].surface
        if prev not in DEMONSTRATIVE_OTHERS:
            continue
        si = sentence_of(f.span[0])
        if si < 0:
            continue
        clause = next(
            (
                (a, b)
                for a, b in _clause_bounds(unit, sents[si])
                if a <= f_lo < b
            ),
            sents[si],
        )
        if any(unit.tokens[i].surface in FIRST_PERSON for i in range(*clause)):
            continue
        evidence.append(
            (RULE_DEMONSTRATIVE_TARGET, (unit.tokens[f_lo - 1].start, f.span[1]))
        )
        fired_sentences.add(si)

    primary = DiLabel.TARGETED if evidence else DiLabel.NOT_TARGETED

    # alternate retention: self-referential aggression in a sentence where
    # no other-directed rule fired records the losing reading
    alternates: frozenset[DiLabel] = frozenset()
    if primary == DiLabel.TARGETED:
        for si, (a, b) in enumerate(sents):
            if si in fired_sentences:
                continue
            sent_span = (unit.tokens[a].start, unit.tokens[b - 1].end)
            has_finding = any(
                f.span[0] >= sent_span[0] and f.span[1] <= sent_span[1]
                for f in spanned
            )
            has_first_person = any(
                unit.tokens[i].surface in FIRST_PERSON for i in range(a, b)
            )
            if has_finding and has_first_person:
                alternates = frozenset({DiLabel.NOT_TARGETED})
                break

    evidence.sort(key=lambda e: (e[1], e[0]))
    return DiResult(primary=primary, alternates=alternates, evidence=tuple(evidence))
