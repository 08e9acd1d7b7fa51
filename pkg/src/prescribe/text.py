"""Text units and tweet-aware normalization.

Raw social-media text arrives with HTML-escaped emoji (``&#128514;``),
URLs, @-mentions and contractions. Normalization lowercases, decodes
entities into single tokens, keeps URLs/mentions atomic and splits
punctuation off. Token spans are byte offsets into the UTF-8 encoding
of the raw text so downstream consumers (including non-Python ones)
share one addressing scheme.
"""

from __future__ import annotations

import html
import re
from dataclasses import dataclass, field

ENTITY_RE = re.compile(r"&#\d+;?|&#[xX][0-9a-fA-F]+;?|&[a-zA-Z][a-zA-Z0-9]*;")
URL_RE = re.compile(r"https?://\S+|www\.[^\s]+", re.IGNORECASE)
MENTION_RE = re.compile(r"@\w+")
WORD_RE = re.compile(r"[^\W_]+(?:['’][^\W_]+)*", re.UNICODE)

_SCAN_RE = re.compile(
    "|".join(
        f"(?P<{name}>{pat.pattern})"
        for name, pat in (
            ("entity", ENTITY_RE),
            ("url", URL_RE),
            ("mention", MENTION_RE),
            ("word", WORD_RE),
        )
    ),
    re.UNICODE | re.IGNORECASE,
)

SENTENCE_TERMINATORS = ".!?…"
QUOTE_CHARS = '"“”'


@dataclass(frozen=True)
class Token:
    """One normalized token; ``start``/``end`` are byte offsets into raw."""

    surface: str
    start: int
    end: int

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class DiscourseTag:
    """Externally supplied discourse-level judgment attached to a unit.

    ``category`` must name a valid item category; ``span`` is an optional
    byte range, None meaning the tag applies to the whole unit.
    """

    category: str
    span: tuple[int, int] | None = None


@dataclass(frozen=True)
class TextUnit:
    """One annotatable piece of text (tweet, post)."""

    id: str
    raw: str
    tokens: tuple[Token, ...]
    source: str = ""
    discourse_tags: tuple[DiscourseTag, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        raw_len = len(self.raw.encode("utf-8"))
        prev_end = 0
        for tok in self.tokens:
            if not (0 <= tok.start < tok.end <= raw_len):
                raise ValueError(
                    f"token span {tok.span} outside raw byte length {raw_len}"
                )
            if tok.start < prev_end:
                raise ValueError(f"token span {tok.span} overlaps previous token")
            prev_end = tok.end
        if not self.tokens and self.raw.strip():
            raise ValueError("non-blank raw text produced no tokens")

    @classmethod
    def from_raw(
        cls,
        unit_id: str,
        raw: str | bytes,
        source: str = "",
        discourse_tags: tuple[DiscourseTag, ...] = (),
    ) -> "TextUnit":
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")  # raises naming the offending byte offset
        return cls(
            id=unit_id,
            raw=raw,
            tokens=tuple(normalize(raw)),
            source=source,
            discourse_tags=tuple(discourse_tags),
        )

    def span_text(self, span: tuple[int, int]) -> str:
        """Raw text at a byte span."""
        return self.raw.encode("utf-8")[span[0] : span[1]].decode("utf-8")


def _byte_offsets(raw: str) -> list[int]:
    """Cumulative UTF-8 byte offset for each character index (plus end)."""
    offsets = [0]
    total = 0
    for ch in raw:
        total += len(ch.encode("utf-8"))
        offsets.append(total)
    return offsets


def normalize(raw: str | bytes) -> list[Token]:
    """Tokenize raw text into case-folded tokens with byte spans.

    HTML entities decode to their characters and stay single tokens;
    URLs and @-mentions stay atomic; punctuation splits off except
    inside contractions (ain't, I'm). Bytes input must be valid UTF-8;
    decoding errors propagate and name the byte offset.
    """
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    offsets = _byte_offsets(raw)
    tokens: list[Token] = []

    def add(surface: str, start_char: int, end_char: int) -> None:
        tokens.append(Token(surface, offsets[start_char], offsets[end_char]))

    pos = 0
    for match in _SCAN_RE.finditer(raw):
        _emit_leftover(raw, pos, match.start(), add)
        kind = match.lastgroup
        text = match.group(0)
        if kind == "entity":
            decoded = html.unescape(text)
            if decoded == text:
                # not a real entity ("&word;" with no meaning): treat as leftover
                _emit_leftover(raw, match.start(), match.end(), add)
            elif decoded.strip():
                add(decoded.lower(), match.start(), match.end())
            # whitespace entities act as separators, no token
        else:
            add(text.lower(), match.start(), match.end())
        pos = match.end()
    _emit_leftover(raw, pos, len(raw), add)
    return tokens


def _emit_leftover(raw: str, start: int, end: int, add) -> None:
    """Emit non-word characters between matches: runs of one repeated
    character become one token (``...``), otherwise one token per char."""
    i = start
    while i < end:
        ch = raw[i]
        if ch.isspace():
            i += 1
            continue
        j = i + 1
        while j < end and raw[j] == ch:
            j += 1
        add(raw[i:j].lower(), i, j)
        i = j


def sentence_ranges(unit: TextUnit) -> list[tuple[int, int]]:
    """Token-index ranges ``[start, end)`` of the unit's sentences.

    A sentence ends at a terminator token (., !, ?, ...) or where the
    raw gap to the next token contains a newline.
    """
    ranges: list[tuple[int, int]] = []
    start = 0
    raw_bytes = unit.raw.encode("utf-8")
    for i, tok in enumerate(unit.tokens):
        is_last = i == len(unit.tokens) - 1
        boundary = tok.surface[0] in SENTENCE_TERMINATORS
        if not boundary and not is_last:
            gap = raw_bytes[tok.end : unit.tokens[i + 1].start]
            boundary = b"\n" in gap
        if boundary or is_last:
            ranges.append((start, i + 1))
            start = i + 1
    return [r for r in ranges if r[0] < r[1]]


def quoted_byte_ranges(raw: str) -> list[tuple[int, int]]:
    """Byte ranges lying inside balanced double-quote pairs.

    Quote characters pair up left to right; a dangling opener creates
    no quoted span. Apostrophes never count (contractions).
    """
    offsets = _byte_offsets(raw)
    marks = [i for i, ch in enumerate(raw) if ch in QUOTE_CHARS]
    ranges = []
    for k in range(0, len(marks) - 1, 2):
        ranges.append((offsets[marks[k]], offsets[marks[k + 1] + 1]))
    return ranges


def in_any_range(span: tuple[int, int], ranges: list[tuple[int, int]]) -> bool:
    return any(span[0] >= lo and span[1] <= hi for lo, hi in ranges)
