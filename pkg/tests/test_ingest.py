"""Extraction and chunking contracts."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tutorkit.errors import EmptyDocument, MalformedPdf, NoTextLayer
from tutorkit.ingest import chunk, extract

from conftest import make_doc, make_pdf, pdf_from_text, random_text, ws_normalize


class TestExtract:
    def test_single_line_page(self):
        pdf = make_pdf([["Page one."], ["Hello world"], ["Page three."]])
        doc = extract(pdf)
        assert len(doc.pages) == 3
        assert doc.pages[1].text == "Hello world"
        assert doc.pages[1].char_count == 11
        assert [p.page_number for p in doc.pages] == [1, 2, 3]

    def test_zero_bytes_is_malformed(self):
        with pytest.raises(MalformedPdf):
            extract(b"")

    def test_garbage_is_malformed(self):
        with pytest.raises(MalformedPdf):
            extract(b"%PDF-1.4\nthis is not really a pdf")

    def test_round_trip_2000_chars(self, rng):
        source = random_text(rng, 320)[:2000].rsplit(" ", 1)[0]
        doc = extract(pdf_from_text(source))
        extracted = " ".join(p.text for p in doc.pages)
        assert ws_normalize(extracted) == ws_normalize(source)

    def test_no_text_layer(self):
        pdf = make_pdf([[], []])
        with pytest.raises(NoTextLayer):
            extract(pdf)

    def test_default_sections_are_per_page(self):
        doc = extract(make_pdf([["a"], ["b"]]))
        assert [(s.label, s.start_page, s.end_page) for s in doc.section_map] == [
            ("Page 1", 1, 1),
            ("Page 2", 2, 2),
        ]

    def test_outline_sections(self):
        pdf = make_pdf(
            [["one"], ["two"], ["three"], ["four"]],
            bookmarks=[("Intro", 0), ("Methods", 2)],
        )
        doc = extract(pdf)
        assert [(s.label, s.start_page, s.end_page) for s in doc.section_map] == [
            ("Intro", 1, 2),
            ("Methods", 3, 4),
        ]

    def test_title_from_metadata(self):
        doc = extract(make_pdf([["x"]], title="A Course Reader"))
        assert doc.title == "A Course Reader"

    def test_determinism(self):
        pdf = make_pdf([["alpha beta"], ["gamma"]])
        a, b = extract(pdf), extract(pdf)
        assert a.doc_id == b.doc_id
        assert [p.text for p in a.pages] == [p.text for p in b.pages]
        assert a.section_map == b.section_map

    def test_line_whitespace_collapses(self):
        # Two draw calls on the same baseline become one space-joined line.
        import io

        from reportlab.lib.pagesizes import letter
        from reportlab.pdfgen import canvas

        buf = io.BytesIO()
        c = canvas.Canvas(buf, pagesize=letter, invariant=1)
        c.drawString(72, 700, "left part")
        c.drawString(300, 700, "right part")
        c.showPage()
        c.save()
        doc = extract(buf.getvalue())
        assert doc.pages[0].text == "left part right part"


class TestChunk:
    def test_stride_spans(self):
        doc = make_doc(["x" * 1000])
        chunks = chunk(doc, size=400, overlap=100)
        bounds = [doc.span_bounds(c.span) for c in chunks]
        assert bounds == [(0, 400), (300, 700), (600, 1000)]

    def test_short_document_single_chunk(self):
        doc = make_doc(["y" * 50])
        chunks = chunk(doc, size=400, overlap=100)
        assert len(chunks) == 1
        assert doc.span_bounds(chunks[0].span) == (0, 50)
        assert chunks[0].text == "y" * 50

    def test_empty_document(self):
        doc = make_doc([""])
        with pytest.raises(EmptyDocument):
            chunk(doc, size=400, overlap=100)

    def test_overlap_must_be_smaller_than_size(self):
        doc = make_doc(["abc"])
        with pytest.raises(ValueError):
            chunk(doc, size=100, overlap=100)

    def test_round_trip_and_coverage(self, rng):
        doc = make_doc([random_text(rng, 300) for _ in range(4)])
        chunks = chunk(doc, size=512, overlap=128)
        covered = set()
        for c in chunks:
            assert doc.slice_span(c.span) == c.text
            start, end = doc.span_bounds(c.span)
            covered.update(range(start, end))
        assert covered == set(range(doc.total_chars))

    def test_reconstruction_from_prefixes(self, rng):
        source = random_text(rng, 1800)[:10000]
        doc = make_doc([source])
        chunks = chunk(doc, size=512, overlap=128)
        rebuilt = chunks[0].text + "".join(c.text[128:] for c in chunks[1:])
        assert rebuilt == doc.full_text

    def test_consecutive_overlap_exact(self, rng):
        doc = make_doc([random_text(rng, 700)])
        chunks = chunk(doc, size=300, overlap=60)
        for prev, cur in zip(chunks, chunks[1:]):
            assert prev.text[-60:] == cur.text[:60]

    def test_chunk_ids_totally_ordered(self, rng):
        doc = make_doc([random_text(rng, 900)])
        chunks = chunk(doc, size=200, overlap=50)
        ids = [c.chunk_id for c in chunks]
        assert ids == sorted(ids)
        assert len(set(ids)) == len(ids)

    @settings(max_examples=30, deadline=None)
    @given(
        n_chars=st.integers(min_value=1, max_value=3000),
        size=st.integers(min_value=2, max_value=600),
        data=st.data(),
    )
    def test_property_round_trip(self, n_chars, size, data):
        overlap = data.draw(st.integers(min_value=0, max_value=size - 1))
        splits = data.draw(
            st.lists(st.integers(min_value=0, max_value=n_chars), max_size=3)
        )
        text = "abcdefghij klmnop\n" * (n_chars // 18 + 1)
        text = text[:n_chars]
        cuts = sorted({0, n_chars, *splits})
        pages = [text[a:b] for a, b in zip(cuts, cuts[1:]) if b > a] or [text]
        doc = make_doc(pages)
        if doc.total_chars == 0:
            return
        chunks = chunk(doc, size=size, overlap=overlap)
        for c in chunks:
            assert doc.slice_span(c.span) == c.text
        covered = set()
        for c in chunks:
            s, e = doc.span_bounds(c.span)
            covered.update(range(s, e))
        assert covered == set(range(doc.total_chars))

    def test_spans_crossing_page_joins(self):
        # Chunks that start or end exactly on the joiner newline still
        # round-trip through the extended page coordinates.
        doc = make_doc(["a" * 9, "b" * 9, "c" * 9])  # joins at 9 and 19
        chunks = chunk(doc, size=10, overlap=1)
        for c in chunks:
            assert doc.slice_span(c.span) == c.text
        assert any("\n" in c.text for c in chunks)
