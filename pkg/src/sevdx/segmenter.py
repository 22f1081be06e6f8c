"""Final-diagnosis section extraction and specimen-part splitting.

Reports carry one diagnostic entry per specimen part, introduced by a short
marker ("A.", "B:", "1)", ...). Splitting is conservative: a chain must start
at "A"/"1" sitting at a line start, after a run of two-plus spaces, or after
sentence-ending punctuation; later markers must strictly continue the monotonic
sequence, so abbreviations and stray enumerations inside prose do not create
false parts.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass, field
from enum import Enum

MAX_LETTER_PARTS = 26
MAX_NUMERIC_PARTS = 99

DEFAULT_HEADING_PATTERNS = [
    r"final\s+pathologic\s+diagnosis",
    r"final\s+diagnosis",
    r"diagnosis:",
]

# A later all-caps heading line ("COMMENT:", "GROSS DESCRIPTION:") ends the section.
_NEXT_HEADING_RE = re.compile(r"(?m)^[ \t]*[A-Z][A-Z /&-]{2,}:")


class SegmenterError(ValueError):
    pass


class MarkerStyle(Enum):
    LETTER_DOT = ("letter", ".")
    LETTER_COLON = ("letter", ":")
    LETTER_PAREN = ("letter", ")")
    NUM_DOT = ("number", ".")
    NUM_COLON = ("number", ":")
    NUM_PAREN = ("number", ")")

    @property
    def kind(self) -> str:
        return self.value[0]

    @property
    def punct(self) -> str:
        return self.value[1]


ALL_STYLES = frozenset(MarkerStyle)


@dataclass(frozen=True)
class RawReport:
    id: str
    text: str
    source_tag: str | None = None
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise SegmenterError("report id must be non-empty")
        if not self.text:
            raise SegmenterError("report text must be non-empty")


@dataclass(frozen=True)
class SpecimenPart:
    report_id: str
    part_id: str
    text: str
    char_span: tuple[int, int]
    marker_span: tuple[int, int] | None = None


@dataclass(frozen=True)
class _Candidate:
    style: MarkerStyle
    token: str  # the letter or the number string
    start: int  # offset of the letter/digit
    end: int    # offset just past the punctuation
    strong: bool  # at line start, after 2+ spaces, or after sentence punctuation


def _style_pattern(style: MarkerStyle) -> re.Pattern:
    sym = "[A-Z]" if style.kind == "letter" else "[1-9][0-9]?"
    punct = re.escape(style.punct)
    return re.compile(rf"(?<=\s)({sym}){punct}(?=\s|\Z)")


def _is_strong(text: str, start: int) -> bool:
    if start == 0:
        return True
    i = start
    while i > 0 and text[i - 1] in " \t":
        i -= 1
    if i == 0 or text[i - 1] == "\n":
        return True
    if start - i >= 2:  # run of two-plus spaces
        return True
    return start > i and i > 0 and text[i - 1] in ".;:!?"


def _find_candidates(text: str, style: MarkerStyle) -> list[_Candidate]:
    # prepend a whitespace sentinel so a marker at offset 0 matches the
    # (?<=\s) guard; offsets shift back by one.
    out = []
    for m in _style_pattern(style).finditer("\n" + text):
        start = m.start(1) - 1
        out.append(
            _Candidate(
                style=style,
                token=m.group(1),
                start=start,
                end=m.end() - 1,
                strong=_is_strong(text, start),
            )
        )
    return out


def _ordinal(token: str, kind: str) -> int:
    if kind == "letter":
        return string.ascii_uppercase.index(token) + 1
    return int(token)


def _monotonic_chain(cands: list[_Candidate], kind: str) -> list[_Candidate]:
    """Greedy strictly-increasing chain that must start at a strong A / 1."""
    chain: list[_Candidate] = []
    prev = 0
    for c in cands:
        val = _ordinal(c.token, kind)
        if (not chain and val == 1 and c.strong) or (chain and val > prev):
            chain.append(c)
            prev = val
    return chain


def split_parts(report: RawReport, styles: frozenset[MarkerStyle] | set[MarkerStyle] = ALL_STYLES) -> list[SpecimenPart]:
    """Split a final-diagnosis section into specimen parts.

    The first style producing >=2 monotonic markers wins (ties broken by the
    earliest first-marker offset); with no such style, a single-marker chain is
    accepted; with no marker at all the whole text becomes one "WHOLE" part.
    """
    if not styles:
        raise SegmenterError("style set must be non-empty")
    text = report.text
    if not text.strip():
        raise SegmenterError("report text is empty")

    chains = []
    for style in sorted(styles, key=lambda s: s.name):
        chain = _monotonic_chain(_find_candidates(text, style), style.kind)
        if chain:
            chains.append(chain)

    multi = [c for c in chains if len(c) >= 2]
    pool = multi if multi else chains
    if not pool:
        return [SpecimenPart(report.id, "WHOLE", text, (0, len(text)))]

    chain = min(pool, key=lambda c: (-min(len(c), 2), c[0].start))
    limit = MAX_LETTER_PARTS if chain[0].style.kind == "letter" else MAX_NUMERIC_PARTS
    if len(chain) > limit:
        raise SegmenterError(f"too many parts: {len(chain)} exceeds limit {limit}")

    parts = []
    for i, cand in enumerate(chain):
        body_start = cand.end
        body_end = chain[i + 1].start if i + 1 < len(chain) else len(text)
        parts.append(
            SpecimenPart(
                report_id=report.id,
                part_id=cand.token,
                text=text[body_start:body_end].strip(),
                char_span=(body_start, body_end),
                marker_span=(cand.start, cand.end),
            )
        )
    return parts


def reconstruct(text: str, parts: list[SpecimenPart]) -> str:
    """Rebuild the section text from emitted spans (losslessness check)."""
    if len(parts) == 1 and parts[0].marker_span is None:
        s, e = parts[0].char_span
        return text[s:e]
    out = text[: parts[0].marker_span[0]]
    for p in parts:
        out += text[p.marker_span[0] : p.marker_span[1]]
        out += text[p.char_span[0] : p.char_span[1]]
    return out


@dataclass(frozen=True)
class SectionResult:
    report: RawReport
    matched: bool
    empty_section: bool = False


def extract_final_diagnosis(
    report: RawReport, heading_patterns: list[str] | None = None
) -> SectionResult:
    """Extract the final-diagnosis section; absence of a heading is not an error."""
    patterns = heading_patterns or DEFAULT_HEADING_PATTERNS
    if not patterns:
        raise SegmenterError("heading_patterns must be non-empty")

    best = None
    for pat in patterns:
        m = re.search(pat, report.text, re.IGNORECASE)
        if m and (best is None or m.start() < best.start()):
            best = m
    if best is None:
        return SectionResult(
            RawReport(report.id, report.text, report.source_tag, report.flags + ("no_heading",)),
            matched=False,
        )

    start = best.end()
    # skip an optional trailing colon and end-of-line after the heading
    rest = report.text[start:]
    skipped = re.match(r"[ \t]*:?[ \t]*\r?\n?", rest)
    if skipped:
        start += skipped.end()
    nxt = _NEXT_HEADING_RE.search(report.text, start)
    end = nxt.start() if nxt else len(report.text)
    section = report.text[start:end]
    if not section.strip():
        return SectionResult(
            RawReport(report.id, report.text, report.source_tag, report.flags + ("empty_section",)),
            matched=True,
            empty_section=True,
        )
    return SectionResult(
        RawReport(report.id, section, report.source_tag, report.flags), matched=True
    )
