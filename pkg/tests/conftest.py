"""Shared fixtures: programmatic PDF builders and document factories."""

from __future__ import annotations

import io
import random
from datetime import datetime, timezone

import pytest
from reportlab.lib.pagesizes import letter
from reportlab.pdfgen import canvas

from tutorkit.ingest import ExtractedDocument, PageText, SectionRange

_WORDS = (
    "retrieval augmented generation models excel at grounding answers in "
    "course readings the leitner system schedules review of weaker concepts "
    "students highlight passages and receive summaries or simpler "
    "explanations every reference maps back to a page span through keyword "
    "matching lexical search ranks chunks by term frequency and inverse "
    "document frequency streaming output narrows the gulf of evaluation "
    "quiz questions target a chosen reading section boxes hold cards by "
    "mastery level"
).split()


def make_pdf(
    pages: list[list[str]],
    title: str = "Fixture",
    bookmarks: list[tuple[str, int]] | None = None,
) -> bytes:
    """Build a PDF with the given lines per page; reproducible byte-for-byte.

    bookmarks: (label, zero-based page index) pairs become top-level outline
    entries.
    """
    buf = io.BytesIO()
    c = canvas.Canvas(buf, pagesize=letter, invariant=1, pageCompression=1)
    c.setTitle(title)
    marks = {idx: label for label, idx in (bookmarks or [])}
    for page_no, lines in enumerate(pages):
        if page_no in marks:
            key = f"bm{page_no}"
            c.bookmarkPage(key)
            c.addOutlineEntry(marks[page_no], key, level=0)
        text = c.beginText(72, 720)
        for line in lines:
            text.textLine(line)
        c.drawText(text)
        c.showPage()
    c.save()
    return buf.getvalue()


def wrap_text(source: str, chars_per_line: int = 70, lines_per_page: int = 38) -> list[list[str]]:
    """Greedy word wrap of source text into page/line structure."""
    words = source.split()
    lines: list[str] = []
    current: list[str] = []
    length = 0
    for word in words:
        extra = len(word) + (1 if current else 0)
        if current and length + extra > chars_per_line:
            lines.append(" ".join(current))
            current, length = [word], len(word)
        else:
            current.append(word)
            length += extra
    if current:
        lines.append(" ".join(current))
    pages = [lines[i:i + lines_per_page] for i in range(0, len(lines), lines_per_page)]
    return pages or [[""]]


def pdf_from_text(source: str, **kwargs) -> bytes:
    return make_pdf(wrap_text(source), **kwargs)


def random_text(rng: random.Random, n_words: int) -> str:
    return " ".join(rng.choice(_WORDS) for _ in range(n_words))


def make_doc(page_texts: list[str], doc_id: str = "dtest") -> ExtractedDocument:
    """Assemble an ExtractedDocument directly, skipping PDF parsing."""
    pages = [PageText.of(i + 1, t) for i, t in enumerate(page_texts)]
    return ExtractedDocument(
        doc_id=doc_id,
        title="direct",
        pages=pages,
        created_at=datetime.now(timezone.utc).isoformat(),
        section_map=[SectionRange(f"Page {i + 1}", i + 1, i + 1) for i in range(len(pages))],
    )


def ws_normalize(text: str) -> str:
    """Whitespace-only normalization used as the round-trip oracle."""
    return " ".join(text.split())


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260809)
