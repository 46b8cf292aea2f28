"""Maps reference excerpts back to page-level highlight spans.

Two stages: exact substring match over whitespace/case-normalized text, then
a token-window scan scored by multiset Jaccard similarity for near-verbatim
needles. Matches crossing page boundaries split into one span per page.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .errors import EmptyNeedle
from .index import tokenize
from .ingest import ExtractedDocument

DEFAULT_TAU = 0.5


@dataclass(frozen=True)
class HighlightSpan:
    page: int
    start: int
    end: int
    confidence: float
    method: str  # "exact" or "fuzzy"

    def to_dict(self) -> dict:
        return {
            "page": self.page,
            "start": self.start,
            "end": self.end,
            "confidence": self.confidence,
            "method": self.method,
        }


@dataclass(frozen=True)
class LocateResult:
    spans: tuple[HighlightSpan, ...]
    located: bool


@dataclass(frozen=True)
class NormalizedText:
    """Casefolded text with whitespace runs collapsed to single spaces.

    starts[i]/ends[i] give the original half-open interval each normalized
    character was produced from; a collapsed space covers its whole run.
    """

    text: str
    starts: tuple[int, ...]
    ends: tuple[int, ...]

    def original_interval(self, lo: int, hi: int) -> tuple[int, int]:
        """Original [start, end) interval for normalized slice [lo, hi)."""
        return self.starts[lo], self.ends[hi - 1]


def normalize(text: str) -> NormalizedText:
    """Casefold, collapse every whitespace run to one space, trim both ends."""
    out: list[str] = []
    starts: list[int] = []
    ends: list[int] = []
    ws_start: int | None = None
    for i, ch in enumerate(text):
        if ch.isspace():
            if ws_start is None:
                ws_start = i
            continue
        if ws_start is not None:
            if out:  # leading whitespace is trimmed, not mapped
                out.append(" ")
                starts.append(ws_start)
                ends.append(i)
            ws_start = None
        for folded in ch.casefold():
            out.append(folded)
            starts.append(i)
            ends.append(i + 1)
    return NormalizedText("".join(out), tuple(starts), tuple(ends))


def _page_spans(
    doc: ExtractedDocument, g0: int, g1: int, confidence: float, method: str
) -> tuple[HighlightSpan, ...]:
    """Split a global [g0, g1) interval into per-page highlight spans.

    Joiner newlines between pages belong to no page and produce no span.
    """
    spans: list[HighlightSpan] = []
    for page_number in range(doc.page_at(g0), doc.page_at(g1 - 1) + 1):
        page = doc.page(page_number)
        base = doc.global_offset(page_number, 0)
        lo = max(g0, base) - base
        hi = min(g1, base + page.char_count) - base
        if hi > lo:
            spans.append(
                HighlightSpan(
                    page=page_number,
                    start=lo,
                    end=hi,
                    confidence=confidence,
                    method=method,
                )
            )
    return tuple(spans)


def locate(
    doc: ExtractedDocument, needle: str, tau: float = DEFAULT_TAU
) -> LocateResult:
    """Find where a (near-)verbatim excerpt sits inside the document.

    Stage 1 takes the first exact occurrence of the normalized needle in the
    normalized document (confidence 1.0). Stage 2 slides a window of the
    needle's token width across the document tokens and accepts the best
    multiset-Jaccard window at or above tau (earliest on ties).
    """
    needle_tokens = tokenize(needle).texts()
    if not needle_tokens:
        raise EmptyNeedle("needle has no tokens after normalization")

    norm_needle = normalize(needle)
    norm_doc = normalize(doc.full_text)
    pos = norm_doc.text.find(norm_needle.text)
    if pos >= 0:
        g0, g1 = norm_doc.original_interval(pos, pos + len(norm_needle.text))
        return LocateResult(_page_spans(doc, g0, g1, 1.0, "exact"), True)

    doc_tokens = tokenize(doc.full_text).tokens
    width = len(needle_tokens)
    if len(doc_tokens) < width:
        return LocateResult((), False)

    target = Counter(needle_tokens)
    window: Counter[str] = Counter()
    intersection = 0
    best_score = -1.0
    best_at = -1
    for i, token in enumerate(doc_tokens):
        if window[token.text] < target[token.text]:
            intersection += 1
        window[token.text] += 1
        if i >= width:
            out = doc_tokens[i - width].text
            window[out] -= 1
            if window[out] < target[out]:
                intersection -= 1
        if i >= width - 1:
            score = intersection / (2 * width - intersection)
            if score > best_score:
                best_score = score
                best_at = i - width + 1

    if best_score < tau:
        return LocateResult((), False)
    g0 = doc_tokens[best_at].start
    g1 = doc_tokens[best_at + width - 1].end
    return LocateResult(_page_spans(doc, g0, g1, best_score, "fuzzy"), True)
