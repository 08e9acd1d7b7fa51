"""Surface-pattern lexicon for the ten aggression item categories.

The lexicon stores lowercase patterns (single words or multi-word
phrases) mapped to item categories and matches them against normalized
units: longest match wins, left to right, non-overlapping within a
category, while the same token may participate in matches of different
categories. Matching is strictly literal; obfuscated spellings are
handled by alias rows in the lexicon file, never by fuzzy matching.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from prescribe.text import TextUnit, normalize


class ItemLevel(Enum):
    LEXICAL = "Lexical"
    SYNTACTIC = "Syntactic"
    DISCOURSE = "Discourse"


class ItemKind(Enum):
    """How a category relates to aggression: item, catalyzer, or the
    context-dependent false construct (resolved at scoring time)."""

    AI = "AI"
    AC = "AC"
    FALSE_CONSTRUCT = "FalseConstruct"


class ItemName(Enum):
    AGGRESSIVE_NOUN_DET_PHRASE = "AggressiveNounDetPhrase"
    AGGRESSIVE_VERB_PHRASE = "AggressiveVerbPhrase"
    AGGRESSIVE_ADJ_PHRASE = "AggressiveAdjPhrase"
    AGGRESSIVE_ADV_PHRASE = "AggressiveAdvPhrase"
    STRONG_EXPRESSION = "StrongExpression"
    RHETORICAL_QUESTION = "RhetoricalQuestion"
    IMPERATIVE = "Imperative"
    IRONIC_EXPRESSION = "IronicExpression"
    FALSE_CONSTRUCT = "FalseConstruct"
    CONTROVERSIAL_CONTENT = "ControversialContent"

    @property
    def level(self) -> ItemLevel:
        return _LEVELS[self]

    @property
    def kind(self) -> ItemKind:
        return _KINDS[self]


_LEVELS = {
    ItemName.AGGRESSIVE_NOUN_DET_PHRASE: ItemLevel.LEXICAL,
    ItemName.AGGRESSIVE_VERB_PHRASE: ItemLevel.LEXICAL,
    ItemName.AGGRESSIVE_ADJ_PHRASE: ItemLevel.LEXICAL,
    ItemName.AGGRESSIVE_ADV_PHRASE: ItemLevel.LEXICAL,
    ItemName.STRONG_EXPRESSION: ItemLevel.SYNTACTIC,
    ItemName.RHETORICAL_QUESTION: ItemLevel.SYNTACTIC,
    ItemName.IMPERATIVE: ItemLevel.SYNTACTIC,
    ItemName.IRONIC_EXPRESSION: ItemLevel.DISCOURSE,
    ItemName.FALSE_CONSTRUCT: ItemLevel.DISCOURSE,
    ItemName.CONTROVERSIAL_CONTENT: ItemLevel.DISCOURSE,
}

_KINDS = {
    ItemName.AGGRESSIVE_NOUN_DET_PHRASE: ItemKind.AI,
    ItemName.AGGRESSIVE_VERB_PHRASE: ItemKind.AI,
    ItemName.AGGRESSIVE_ADJ_PHRASE: ItemKind.AI,
    ItemName.AGGRESSIVE_ADV_PHRASE: ItemKind.AC,
    ItemName.STRONG_EXPRESSION: ItemKind.AC,
    ItemName.RHETORICAL_QUESTION: ItemKind.AC,
    ItemName.IMPERATIVE: ItemKind.AC,
    ItemName.IRONIC_EXPRESSION: ItemKind.AC,
    ItemName.FALSE_CONSTRUCT: ItemKind.FALSE_CONSTRUCT,
    ItemName.CONTROVERSIAL_CONTENT: ItemKind.AI,
}

VALID_CATEGORY_NAMES = tuple(name.value for name in ItemName)


class LexiconError(ValueError):
    """Malformed lexicon file."""


@dataclass(frozen=True)
class LexiconEntry:
    pattern: str
    category: ItemName
    alias_of: str | None = None
    notes: str = ""

    def __post_init__(self) -> None:
        if not self.pattern or self.pattern != self.pattern.strip().lower():
            raise LexiconError(
                f"pattern must be non-empty, lowercase, trimmed: {self.pattern!r}"
            )


@dataclass(frozen=True)
class LexiconMatch:
    entry: LexiconEntry
    span: tuple[int, int]  # byte range into unit.raw
    token_range: tuple[int, int]  # [start, end) token indices


class Lexicon:
    """Immutable pattern store indexed for longest-match lookup."""

    def __init__(self, entries: list[LexiconEntry]):
        unique: dict[tuple[str, ItemName], LexiconEntry] = {}
        for entry in entries:
            unique.setdefault((entry.pattern, entry.category), entry)
        self.entries: tuple[LexiconEntry, ...] = tuple(
            sorted(unique.values(), key=lambda e: (e.pattern, e.category.value))
        )
        # first pattern-token -> [(pattern_tokens, entry)], longest first
        index: dict[tuple[ItemName, str], list[tuple[tuple[str, ...], LexiconEntry]]] = {}
        for entry in self.entries:
            pattern_tokens = tuple(t.surface for t in normalize(entry.pattern))
            if not pattern_tokens:
                raise LexiconError(f"pattern {entry.pattern!r} normalizes to nothing")
            index.setdefault((entry.category, pattern_tokens[0]), []).append(
                (pattern_tokens, entry)
            )
        for bucket in index.values():
            bucket.sort(key=lambda item: -len(item[0]))
        self._index = index
        digest = hashlib.sha256()
        for entry in self.entries:
            digest.update(
                f"{entry.pattern}\t{entry.category.value}\t{entry.alias_of or ''}\n".encode()
            )
        self.version = digest.hexdigest()

    def __len__(self) -> int:
        return len(self.entries)

    def categories_of(self, category: ItemName) -> list[LexiconEntry]:
        return [e for e in self.entries if e.category == category]

    def with_entries(self, extra: list[LexiconEntry]) -> "Lexicon":
        """New lexicon with additional entries (reload, never mutate)."""
        return Lexicon(list(self.entries) + list(extra))


def parse_category(name: str) -> ItemName:
    for item in ItemName:
        if item.value == name:
            return item
    raise LexiconError(
        f"unknown category {name!r}; valid names: {', '.join(VALID_CATEGORY_NAMES)}"
    )


def load_lexicon(source: str | Path) -> Lexicon:
    """Load a lexicon from a TSV file.

    Columns: pattern<TAB>category[<TAB>alias-of[<TAB>notes]]. Lines
    starting with ``#`` and blank lines are ignored. Duplicate
    (pattern, category) rows collapse to one entry.
    """
    path = Path(source)
    if not path.exists():
        raise LexiconError(f"lexicon file not found: {path}")
    entries: list[LexiconEntry] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) < 2:
                raise LexiconError(
                    f"{path}:{lineno}: expected pattern<TAB>category, got {line!r}"
                )
            pattern = cols[0].strip().lower()
            if not pattern:
                raise LexiconError(f"{path}:{lineno}: empty pattern")
            try:
                category = parse_category(cols[1].strip())
            except LexiconError as exc:
                raise LexiconError(f"{path}:{lineno}: {exc}") from None
            alias_of = cols[2].strip().lower() or None if len(cols) > 2 else None
            notes = cols[3].strip() if len(cols) > 3 else ""
            entries.append(LexiconEntry(pattern, category, alias_of, notes))
    return Lexicon(entries)


def seed_lexicon_path() -> Path:
    """Path of the packaged seed lexicon."""
    return Path(str(resources.files("prescribe").joinpath("data/lexicon.tsv")))


def load_seed_lexicon() -> Lexicon:
    return load_lexicon(seed_lexicon_path())


def match(unit: TextUnit, lexicon: Lexicon) -> list[LexiconMatch]:
    """All lexicon matches in a unit.

    Longest match, left to right, non-overlapping within a category;
    matches of different categories may share tokens. Every reported
    span satisfies ``lower(raw[span]) == pattern`` byte for byte, so
    multi-word patterns only match single-space-separated runs.
    """
    raw_bytes = unit.raw.encode("utf-8")
    matches: list[LexiconMatch] = []
    categories = {entry.category for entry in lexicon.entries}
    for category in categories:
        i = 0
        n = len(unit.tokens)
        while i < n:
            bucket = lexicon._index.get((category, unit.tokens[i].surface), [])
            found = None
            for pattern_tokens, entry in bucket:  # longest first
                k = len(pattern_tokens)
                if i + k > n:
                    continue
                if tuple(t.surface for t in unit.tokens[i : i + k]) != pattern_tokens:
                    continue
                span = (unit.tokens[i].start, unit.tokens[i + k - 1].end)
                surface = raw_bytes[span[0] : span[1]].decode("utf-8", "replace")
                if surface.lower() != entry.pattern:
                    continue
                found = LexiconMatch(entry, span, (i, i + k))
                break
            if found:
                matches.append(found)
                i = found.token_range[1]
            else:
                i += 1
    matches.sort(key=lambda m: (m.span, m.entry.category.value))
    return matches
