"""PDF ingestion: per-page text with stable character offsets, plus chunking.

The coordinate system is abstract characters (Unicode scalar values). A
document's pages concatenate with a single newline between consecutive pages;
that joiner newline conceptually sits at offset ``len(page.text)`` of the
earlier page and belongs to neither page's own text. Chunk spans therefore
use an *extended* page coordinate where ``start_offset`` may equal the page
length (the span begins at the joiner newline) and ``end_offset`` may exceed
it by one (the span ends just past it).
"""

from __future__ import annotations

import hashlib
from bisect import bisect_right
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import EmptyDocument, NoTextLayer
from .index import tokenize
from .pdf import PdfReader


@dataclass(frozen=True)
class PageText:
    page_number: int
    text: str
    char_count: int

    @classmethod
    def of(cls, page_number: int, text: str) -> "PageText":
        return cls(page_number=page_number, text=text, char_count=len(text))


@dataclass(frozen=True)
class SectionRange:
    label: str
    start_page: int
    end_page: int  # inclusive


@dataclass(frozen=True)
class DocSpan:
    start_page: int
    start_offset: int
    end_page: int
    end_offset: int

    def to_dict(self) -> dict:
        return {
            "start_page": self.start_page,
            "start_offset": self.start_offset,
            "end_page": self.end_page,
            "end_offset": self.end_offset,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DocSpan":
        return cls(
            start_page=int(data["start_page"]),
            start_offset=int(data["start_offset"]),
            end_page=int(data["end_page"]),
            end_offset=int(data["end_offset"]),
        )


@dataclass
class ExtractedDocument:
    doc_id: str
    title: str
    pages: list[PageText]
    created_at: str
    section_map: list[SectionRange]
    _full_text: str = field(init=False, repr=False, default="")
    _page_starts: list[int] = field(init=False, repr=False, default_factory=list)

    def __post_init__(self) -> None:
        self._full_text = "\n".join(p.text for p in self.pages)
        starts, pos = [], 0
        for page in self.pages:
            starts.append(pos)
            pos += page.char_count + 1  # +1 for the joiner newline
        self._page_starts = starts

    @property
    def full_text(self) -> str:
        return self._full_text

    @property
    def total_chars(self) -> int:
        return len(self._full_text)

    def page(self, page_number: int) -> PageText:
        return self.pages[page_number - 1]

    def global_offset(self, page_number: int, offset: int) -> int:
        return self._page_starts[page_number - 1] + offset

    def page_at(self, global_offset: int) -> int:
        """Page number owning a global offset; joiner newlines belong to the
        earlier page's extended coordinate space."""
        idx = bisect_right(self._page_starts, global_offset) - 1
        return idx + 1

    def span_for(self, start: int, end: int) -> DocSpan:
        """DocSpan for a half-open global interval [start, end)."""
        if not 0 <= start < end <= self.total_chars:
            raise ValueError(f"interval [{start}, {end}) out of bounds")
        start_page = self.page_at(start)
        end_page = self.page_at(end - 1)
        return DocSpan(
            start_page=start_page,
            start_offset=start - self._page_starts[start_page - 1],
            end_page=end_page,
            end_offset=(end - 1) - self._page_starts[end_page - 1] + 1,
        )

    def span_bounds(self, span: DocSpan) -> tuple[int, int]:
        start = self.global_offset(span.start_page, span.start_offset)
        end = self.global_offset(span.end_page, span.end_offset)
        return start, end

    def slice_span(self, span: DocSpan) -> str:
        start, end = self.span_bounds(span)
        return self._full_text[start:end]

    def section(self, label: str) -> SectionRange | None:
        for sec in self.section_map:
            if sec.label == label:
                return sec
        return None


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    doc_id: str
    span: DocSpan
    text: str
    token_count: int


def _normalize_page_text(raw: str) -> str:
    """Collapse run-internal whitespace to single spaces, drop blank lines."""
    lines = [" ".join(line.split()) for line in raw.split("\n")]
    return "\n".join(line for line in lines if line)


def _build_section_map(reader: PdfReader, page_count: int) -> list[SectionRange]:
    bookmarks = reader.outline()
    if not bookmarks:
        return [SectionRange(f"Page {n}", n, n) for n in range(1, page_count + 1)]
    sections: list[SectionRange] = []
    seen: dict[str, int] = {}
    for i, (title, page_idx) in enumerate(bookmarks):
        start = page_idx + 1
        end = bookmarks[i + 1][1] if i + 1 < len(bookmarks) else page_count
        label = title.strip() or f"Section {i + 1}"
        if label in seen:
            seen[label] += 1
            label = f"{label} ({seen[label]})"
        else:
            seen[label] = 1
        sections.append(SectionRange(label, start, max(start, end)))
    return sections


def derive_doc_id(pdf_bytes: bytes) -> str:
    """Content-derived id: identical bytes always map to the same document."""
    return "d" + hashlib.sha256(pdf_bytes).hexdigest()[:12]


def extract(pdf_bytes: bytes) -> ExtractedDocument:
    """Parse a PDF into per-page text with a stable offset coordinate system.

    Raises MalformedPdf for unparseable bytes and NoTextLayer when no page
    yields a single character (scanned documents; OCR is out of scope).
    """
    reader = PdfReader(pdf_bytes)
    pages = [
        PageText.of(i + 1, _normalize_page_text(reader.page_text(i)))
        for i in range(len(reader.pages))
    ]
    if all(p.char_count == 0 for p in pages):
        raise NoTextLayer("no extractable text on any page")
    return ExtractedDocument(
        doc_id=derive_doc_id(pdf_bytes),
        title=reader.title.strip() or "untitled",
        pages=pages,
        created_at=datetime.now(timezone.utc).isoformat(),
        section_map=_build_section_map(reader, len(pages)),
    )


def chunk(doc: ExtractedDocument, size: int = 1000, overlap: int = 200) -> list[Chunk]:
    """Slice the page-concatenated text into fixed-stride overlapping chunks.

    Starts run at 0, size-overlap, 2*(size-overlap), ... and the final chunk
    may be shorter; consecutive chunks overlap by exactly `overlap` chars.
    """
    if overlap < 0 or size <= 0 or overlap >= size:
        raise ValueError("require 0 <= overlap < size")
    total = doc.total_chars
    if total == 0:
        raise EmptyDocument(f"document {doc.doc_id} has no characters")
    stride = size - overlap
    chunks: list[Chunk] = []
    width = max(4, len(str(total // stride + 1)))
    start = 0
    while True:
        end = min(start + size, total)
        text = doc.full_text[start:end]
        chunks.append(
            Chunk(
                chunk_id=f"c{len(chunks):0{width}d}",
                doc_id=doc.doc_id,
                span=doc.span_for(start, end),
                text=text,
                token_count=len(tokenize(text).tokens),
            )
        )
        if end >= total:
            return chunks
        start += stride
