"""Minimal PDF reader: object model, xref parsing, filters, text extraction.

Covers the subset of PDF needed to pull a text layer and outline out of
digitally-produced documents: classic xref tables and xref streams, object
streams, Flate/ASCII85/ASCIIHex filters (with PNG predictors), simple and
Type0 fonts with WinAnsi/MacRoman/Differences encodings and ToUnicode CMaps.
Layout recovery is deliberately simple: glyph runs are bucketed into lines by
their text-space y coordinate and ordered left to right.
"""

from __future__ import annotations

import base64
import logging
import re
import zlib
from dataclasses import dataclass, field

from .errors import MalformedPdf

logger = logging.getLogger(__name__)

_WHITESPACE = b"\x00\t\n\x0c\r "
_DELIMS = b"()<>[]{}/%"

# Gap threshold in thousandths of an em: TJ adjustments at or past this are
# treated as word breaks rather than kerning.
_TJ_SPACE_THRESHOLD = -180

# Runs whose y coordinates differ by no more than this land on the same line.
_LINE_TOLERANCE = 2.0


class Name(str):
    """A PDF name object; distinct from string values."""

    __slots__ = ()


@dataclass(frozen=True)
class Ref:
    num: int
    gen: int


@dataclass
class Stream:
    attrs: dict
    raw: bytes


_KEYWORDS = {b"true": True, b"false": False, b"null": None}


class _Lexer:
    """Token reader over raw PDF bytes."""

    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def _skip_ws(self) -> None:
        data, n = self.data, len(self.data)
        while self.pos < n:
            ch = data[self.pos]
            if ch in _WHITESPACE:
                self.pos += 1
            elif ch == 0x25:  # '%' comment to end of line
                while self.pos < n and data[self.pos] not in b"\r\n":
                    self.pos += 1
            else:
                return

    def peek_byte(self) -> int | None:
        self._skip_ws()
        if self.pos >= len(self.data):
            return None
        return self.data[self.pos]

    def read_token(self) -> tuple[str, object]:
        """Return (kind, value); kind in {num,name,str,arr,dict,kw,end}."""
        self._skip_ws()
        data, n = self.data, len(self.data)
        if self.pos >= n:
            return ("end", None)
        ch = data[self.pos]
        if ch == 0x2F:  # '/'
            return ("name", self._read_name())
        if ch == 0x28:  # '('
            return ("str", self._read_literal_string())
        if ch == 0x3C:  # '<'
            if data.startswith(b"<<", self.pos):
                self.pos += 2
                return ("dict_open", None)
            return ("str", self._read_hex_string())
        if ch == 0x3E:  # '>'
            if data.startswith(b">>", self.pos):
                self.pos += 2
                return ("dict_close", None)
            raise MalformedPdf("stray '>' in object data")
        if ch == 0x5B:  # '['
            self.pos += 1
            return ("arr_open", None)
        if ch == 0x5D:  # ']'
            self.pos += 1
            return ("arr_close", None)
        if ch == 0x7B:  # '{' postscript calculator blocks; treat as keyword
            self.pos += 1
            return ("kw", b"{")
        if ch == 0x7D:
            self.pos += 1
            return ("kw", b"}")
        if ch in b"+-.0123456789":
            return ("num", self._read_number())
        return ("kw", self._read_keyword())

    def _read_keyword(self) -> bytes:
        start = self.pos
        data, n = self.data, len(self.data)
        while self.pos < n and data[self.pos] not in _WHITESPACE and data[self.pos] not in _DELIMS:
            self.pos += 1
        if self.pos == start:
            raise MalformedPdf(f"unparseable byte {data[start]!r} at {start}")
        return data[start:self.pos]

    def _read_number(self) -> float | int:
        raw = self._read_keyword()
        try:
            if b"." in raw:
                return float(raw)
            return int(raw)
        except ValueError as exc:
            raise MalformedPdf(f"bad number {raw!r}") from exc

    def _read_name(self) -> Name:
        self.pos += 1  # '/'
        data, n = self.data, len(self.data)
        out = bytearray()
        while self.pos < n:
            ch = data[self.pos]
            if ch in _WHITESPACE or ch in _DELIMS:
                break
            if ch == 0x23 and self.pos + 2 < n:  # '#xx'
                try:
                    out.append(int(data[self.pos + 1:self.pos + 3], 16))
                    self.pos += 3
                    continue
                except ValueError:
                    pass
            out.append(ch)
            self.pos += 1
        return Name(out.decode("latin-1"))

    def _read_literal_string(self) -> bytes:
        self.pos += 1  # '('
        data, n = self.data, len(self.data)
        out = bytearray()
        depth = 1
        while self.pos < n:
            ch = data[self.pos]
            self.pos += 1
            if ch == 0x5C:  # backslash
                if self.pos >= n:
                    break
                esc = data[self.pos]
                self.pos += 1
                if esc in b"nrtbf":
                    out.append({0x6E: 10, 0x72: 13, 0x74: 9, 0x62: 8, 0x66: 12}[esc])
                elif esc in b"()\\":
                    out.append(esc)
                elif esc in b"01234567":
                    digits = bytes([esc])
                    while len(digits) < 3 and self.pos < n and data[self.pos] in b"01234567":
                        digits += bytes([data[self.pos]])
                        self.pos += 1
                    out.append(int(digits, 8) & 0xFF)
                elif esc in b"\r\n":  # line continuation
                    if esc == 0x0D and self.pos < n and data[self.pos] == 0x0A:
                        self.pos += 1
                else:
                    out.append(esc)
            elif ch == 0x28:
                depth += 1
                out.append(ch)
            elif ch == 0x29:
                depth -= 1
                if depth == 0:
                    return bytes(out)
                out.append(ch)
            else:
                out.append(ch)
        raise MalformedPdf("unterminated literal string")

    def _read_hex_string(self) -> bytes:
        self.pos += 1  # '<'
        data, n = self.data, len(self.data)
        digits = bytearray()
        while self.pos < n:
            ch = data[self.pos]
            self.pos += 1
            if ch == 0x3E:  # '>'
                if len(digits) % 2:
                    digits.append(0x30)
                return bytes.fromhex(digits.decode("ascii"))
            if ch in _WHITESPACE:
                continue
            digits.append(ch)
        raise MalformedPdf("unterminated hex string")


class _Parser:
    """Composite-object parser with indirect-reference lookahead."""

    def __init__(self, data: bytes, pos: int = 0):
        self.lex = _Lexer(data, pos)
        self._pushback: list[tuple[str, object]] = []

    @property
    def pos(self) -> int:
        return self.lex.pos

    def _next(self) -> tuple[str, object]:
        if self._pushback:
            return self._pushback.pop()
        return self.lex.read_token()

    def _push(self, tok: tuple[str, object]) -> None:
        self._pushback.append(tok)

    def parse(self) -> object:
        kind, value = self._next()
        return self._parse_from(kind, value)

    def _parse_from(self, kind: str, value: object) -> object:
        if kind == "num":
            return self._maybe_ref(value)
        if kind in ("name", "str"):
            return value
        if kind == "dict_open":
            return self._parse_dict()
        if kind == "arr_open":
            return self._parse_array()
        if kind == "kw":
            if value in _KEYWORDS:
                return _KEYWORDS[value]
            raise MalformedPdf(f"unexpected keyword {value!r} in object")
        if kind == "end":
            raise MalformedPdf("unexpected end of data")
        raise MalformedPdf(f"unexpected token {kind}")

    def _maybe_ref(self, first: object) -> object:
        if not isinstance(first, int):
            return first
        tok2 = self._next()
        if tok2[0] == "num" and isinstance(tok2[1], int):
            tok3 = self._next()
            if tok3[0] == "kw" and tok3[1] == b"R":
                return Ref(first, tok2[1])
            self._push(tok3)
            self._push(tok2)
            return first
        self._push(tok2)
        return first

    def _parse_dict(self) -> dict:
        out: dict = {}
        while True:
            kind, value = self._next()
            if kind == "dict_close":
                return out
            if kind != "name":
                raise MalformedPdf(f"dict key is {kind}, expected name")
            out[str(value)] = self.parse()

    def _parse_array(self) -> list:
        out: list = []
        while True:
            kind, value = self._next()
            if kind == "arr_close":
                return out
            out.append(self._parse_from(kind, value))


# --- stream filters --------------------------------------------------------


def _png_unpredict(data: bytes, colors: int, bpc: int, columns: int) -> bytes:
    row_len = (colors * bpc * columns + 7) // 8
    stride = row_len + 1
    out = bytearray()
    prev = bytearray(row_len)
    bpp = max(1, (colors * bpc + 7) // 8)
    for off in range(0, len(data) - stride + 1, stride):
        ftype = data[off]
        row = bytearray(data[off + 1:off + 1 + row_len])
        if ftype == 1:  # Sub
            for i in range(bpp, row_len):
                row[i] = (row[i] + row[i - bpp]) & 0xFF
        elif ftype == 2:  # Up
            for i in range(row_len):
                row[i] = (row[i] + prev[i]) & 0xFF
        elif ftype == 3:  # Average
            for i in range(row_len):
                left = row[i - bpp] if i >= bpp else 0
                row[i] = (row[i] + (left + prev[i]) // 2) & 0xFF
        elif ftype == 4:  # Paeth
            for i in range(row_len):
                a = row[i - bpp] if i >= bpp else 0
                b = prev[i]
                c = prev[i - bpp] if i >= bpp else 0
                p = a + b - c
                pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
                pred = a if pa <= pb and pa <= pc else (b if pb <= pc else c)
                row[i] = (row[i] + pred) & 0xFF
        out.extend(row)
        prev = row
    return bytes(out)


def _apply_filter(name: str, data: bytes, parms: dict) -> bytes:
    if name in ("FlateDecode", "Fl"):
        try:
            data = zlib.decompress(data)
        except zlib.error as exc:
            raise MalformedPdf(f"bad Flate stream: {exc}") from exc
    elif name in ("ASCII85Decode", "A85"):
        text = data.strip()
        if text.startswith(b"<~"):
            text = text[2:]
        if text.endswith(b"~>"):
            text = text[:-2]
        try:
            data = base64.a85decode(text, adobe=False, ignorechars=b" \t\n\r\x0c\x00")
        except ValueError as exc:
            raise MalformedPdf(f"bad ASCII85 stream: {exc}") from exc
    elif name in ("ASCIIHexDecode", "AHx"):
        digits = re.sub(rb"[\s>]", b"", data)
        if len(digits) % 2:
            digits += b"0"
        data = bytes.fromhex(digits.decode("ascii", "replace"))
    else:
        raise MalformedPdf(f"unsupported stream filter {name}")
    predictor = parms.get("Predictor", 1)
    if isinstance(predictor, int) and predictor >= 10:
        data = _png_unpredict(
            data,
            parms.get("Colors", 1),
            parms.get("BitsPerComponent", 8),
            parms.get("Columns", 1),
        )
    return data


# --- reader ----------------------------------------------------------------


class PdfReader:
    """Parses a PDF byte string into pages, metadata, and an outline."""

    def __init__(self, data: bytes):
        if not data.startswith(b"%PDF-"):
            raise MalformedPdf("missing %PDF header")
        self.data = data
        self._cache: dict[tuple[int, int], object] = {}
        self._xref: dict[int, tuple] = {}
        self.trailer: dict = {}
        try:
            self._load_xref()
        except MalformedPdf:
            self._xref = {}
            self.trailer = {}
        if not self._xref or "Root" not in self.trailer:
            self._scan_objects()
        if "Encrypt" in self.trailer or re.search(rb"/Encrypt\s+\d+\s+\d+\s+R", data):
            raise MalformedPdf("encrypted documents are not supported")
        if "Root" not in self.trailer:
            raise MalformedPdf("no document catalog")
        self.pages: list[dict] = []
        self._collect_pages()
        if not self.pages:
            raise MalformedPdf("document has no pages")

    # -- xref ---------------------------------------------------------------

    def _load_xref(self) -> None:
        tail = self.data[-2048:]
        m = None
        for m in re.finditer(rb"startxref\s+(\d+)", tail):
            pass
        if m is None:
            raise MalformedPdf("missing startxref")
        offset = int(m.group(1))
        seen: set[int] = set()
        while offset and offset not in seen and 0 <= offset < len(self.data):
            seen.add(offset)
            lex = _Lexer(self.data, offset)
            if lex.peek_byte() == 0x78 and self.data.startswith(b"xref", lex.pos):
                trailer = self._parse_xref_table(lex.pos + 4)
            else:
                trailer = self._parse_xref_stream(offset)
            for key in ("Root", "Info", "Encrypt", "ID", "Size"):
                if key in trailer and key not in self.trailer:
                    self.trailer[key] = trailer[key]
            if "XRefStm" in trailer:  # hybrid-reference file
                try:
                    self._parse_xref_stream(int(trailer["XRefStm"]))
                except (MalformedPdf, ValueError):
                    pass
            offset = trailer.get("Prev")
            offset = int(offset) if isinstance(offset, (int, float)) else 0

    _XREF_ENTRY = re.compile(rb"(\d{10})\s+(\d{5})\s+([nf])")

    def _parse_xref_table(self, pos: int) -> dict:
        lex = _Lexer(self.data, pos)
        while True:
            lex._skip_ws()
            if self.data.startswith(b"trailer", lex.pos):
                parser = _Parser(self.data, lex.pos + len(b"trailer"))
                trailer = parser.parse()
                if not isinstance(trailer, dict):
                    raise MalformedPdf("xref trailer is not a dict")
                return trailer
            kind, start = lex.read_token()
            kind2, count = lex.read_token()
            if kind != "num" or kind2 != "num":
                raise MalformedPdf("bad xref subsection header")
            for i in range(int(count)):
                lex._skip_ws()
                m = self._XREF_ENTRY.match(self.data, lex.pos)
                if m is None:
                    raise MalformedPdf("bad xref entry")
                num = int(start) + i
                if m.group(3) == b"n" and num not in self._xref:
                    self._xref[num] = ("n", int(m.group(1)), int(m.group(2)))
                lex.pos = m.end()

    def _parse_xref_stream(self, offset: int) -> dict:
        obj = self._parse_object_at(offset)
        if not isinstance(obj, Stream):
            raise MalformedPdf("xref stream expected")
        attrs = obj.attrs
        data = self._decode_stream(obj)
        widths = [int(w) for w in attrs.get("W", [])]
        if len(widths) != 3:
            raise MalformedPdf("xref stream missing W")
        size = int(attrs.get("Size", 0))
        index = attrs.get("Index", [0, size])
        entry_len = sum(widths)
        pos = 0
        pairs = [(int(index[i]), int(index[i + 1])) for i in range(0, len(index) - 1, 2)]
        for start, count in pairs:
            for i in range(count):
                if pos + entry_len > len(data):
                    break
                fields = []
                for w in widths:
                    fields.append(int.from_bytes(data[pos:pos + w], "big") if w else None)
                    pos += w
                ftype = fields[0] if widths[0] else 1
                num = start + i
                if num in self._xref:
                    continue
                if ftype == 1:
                    self._xref[num] = ("n", fields[1], fields[2] or 0)
                elif ftype == 2:
                    self._xref[num] = ("c", fields[1], fields[2] or 0)
        return attrs

    def _scan_objects(self) -> None:
        """Fallback: build the xref by scanning for `N G obj` markers."""
        for m in re.finditer(rb"(?<![0-9])(\d+)\s+(\d+)\s+obj\b", self.data):
            self._xref[int(m.group(1))] = ("n", m.start(), int(m.group(2)))
        # objects hidden inside object streams have no marker of their own
        for num, entry in list(self._xref.items()):
            if entry[0] != "n":
                continue
            try:
                obj = self._parse_object_at(entry[1])
            except MalformedPdf:
                continue
            if not (isinstance(obj, Stream) and obj.attrs.get("Type") == "ObjStm"):
                continue
            try:
                data = self._decode_stream(obj)
                header = _Lexer(data, 0)
                for _ in range(int(self.resolve(obj.attrs.get("N", 0)))):
                    kind1, member = header.read_token()
                    kind2, _offset = header.read_token()
                    if kind1 != "num" or kind2 != "num":
                        break
                    if int(member) not in self._xref:
                        self._xref[int(member)] = ("c", num, 0)
            except MalformedPdf:
                continue
        if "Root" not in self.trailer:
            m = re.search(rb"/Root\s+(\d+)\s+(\d+)\s+R", self.data)
            if m:
                self.trailer["Root"] = Ref(int(m.group(1)), int(m.group(2)))
        if "Info" not in self.trailer:
            m = re.search(rb"/Info\s+(\d+)\s+(\d+)\s+R", self.data)
            if m:
                self.trailer["Info"] = Ref(int(m.group(1)), int(m.group(2)))

    # -- object loading -------------------------------------------------------

    def resolve(self, obj: object) -> object:
        seen = 0
        while isinstance(obj, Ref):
            seen += 1
            if seen > 32:
                raise MalformedPdf("reference cycle")
            obj = self._load(obj.num, obj.gen)
        return obj

    def _load(self, num: int, gen: int) -> object:
        key = (num, gen)
        if key in self._cache:
            return self._cache[key]
        entry = self._xref.get(num)
        if entry is None:
            self._cache[key] = None
            return None
        obj: object
        if entry[0] == "n":
            obj = self._parse_object_at(entry[1])
        else:  # compressed object inside an object stream
            obj = self._load_from_objstm(entry[1], num)
        self._cache[key] = obj
        return obj

    def _parse_object_at(self, offset: int) -> object:
        lex = _Lexer(self.data, offset)
        for _ in range(3):  # num gen obj
            lex.read_token()
        parser = _Parser(self.data, lex.pos)
        obj = parser.parse()
        if isinstance(obj, dict):
            lex2 = _Lexer(self.data, parser.pos)
            lex2._skip_ws()
            if self.data.startswith(b"stream", lex2.pos):
                start = lex2.pos + len(b"stream")
                if self.data.startswith(b"\r\n", start):
                    start += 2
                elif self.data.startswith(b"\n", start) or self.data.startswith(b"\r", start):
                    start += 1
                length = self.resolve(obj.get("Length"))
                if isinstance(length, (int, float)) and length >= 0:
                    end = start + int(length)
                else:
                    end = self.data.find(b"endstream", start)
                    if end < 0:
                        raise MalformedPdf("unterminated stream")
                return Stream(obj, self.data[start:end])
        return obj

    def _load_from_objstm(self, stm_num: int, want: int) -> object:
        stm = self._load(stm_num, 0)
        if not isinstance(stm, Stream):
            raise MalformedPdf(f"object stream {stm_num} missing")
        data = self._decode_stream(stm)
        count = int(self.resolve(stm.attrs.get("N", 0)))
        first = int(self.resolve(stm.attrs.get("First", 0)))
        header = _Lexer(data, 0)
        offsets: dict[int, int] = {}
        for _ in range(count):
            kind1, num = header.read_token()
            kind2, off = header.read_token()
            if kind1 != "num" or kind2 != "num":
                raise MalformedPdf("bad object stream header")
            offsets[int(num)] = int(off)
        if want not in offsets:
            raise MalformedPdf(f"object {want} not in stream {stm_num}")
        return _Parser(data, first + offsets[want]).parse()

    def _decode_stream(self, stm: Stream) -> bytes:
        filters = self.resolve(stm.attrs.get("Filter"))
        parms = self.resolve(stm.attrs.get("DecodeParms")) or {}
        if filters is None:
            return stm.raw
        if not isinstance(filters, list):
            filters = [filters]
        if not isinstance(parms, list):
            parms = [parms] * len(filters)
        data = stm.raw
        for i, f in enumerate(filters):
            parm = self.resolve(parms[i]) if i < len(parms) else {}
            data = _apply_filter(str(self.resolve(f)), data, parm or {})
        return data

    # -- pages ----------------------------------------------------------------

    def _collect_pages(self) -> None:
        root = self.resolve(self.trailer.get("Root"))
        if not isinstance(root, dict):
            raise MalformedPdf("catalog is not a dict")
        tree = self.resolve(root.get("Pages"))
        if not isinstance(tree, dict):
            raise MalformedPdf("missing page tree")
        self._page_refs: list[Ref] = []
        self._walk_pages(root.get("Pages"), inherited={}, depth=0)

    def _walk_pages(self, node_ref: object, inherited: dict, depth: int) -> None:
        if depth > 64:
            raise MalformedPdf("page tree too deep")
        node = self.resolve(node_ref)
        if not isinstance(node, dict):
            return
        merged = dict(inherited)
        for key in ("Resources", "MediaBox", "Rotate"):
            if key in node:
                merged[key] = node[key]
        if node.get("Type") == "Page" or ("Kids" not in node and "Contents" in node):
            page = dict(node)
            for key, value in merged.items():
                page.setdefault(key, value)
            self.pages.append(page)
            if isinstance(node_ref, Ref):
                self._page_refs.append(node_ref)
            else:
                self._page_refs.append(Ref(-len(self.pages), 0))
            return
        for kid in self.resolve(node.get("Kids")) or []:
            self._walk_pages(kid, merged, depth + 1)

    def page_index_of(self, ref: object) -> int | None:
        if isinstance(ref, Ref):
            for i, pref in enumerate(self._page_refs):
                if pref == ref:
                    return i
        return None

    # -- metadata & outline -----------------------------------------------------

    @property
    def title(self) -> str:
        info = self.resolve(self.trailer.get("Info"))
        if isinstance(info, dict):
            raw = self.resolve(info.get("Title"))
            if isinstance(raw, bytes):
                return _decode_text_string(raw)
        return ""

    def outline(self) -> list[tuple[str, int]]:
        """Top-level bookmarks as (title, zero-based page index) pairs."""
        root = self.resolve(self.trailer.get("Root"))
        if not isinstance(root, dict):
            return []
        outlines = self.resolve(root.get("Outlines"))
        if not isinstance(outlines, dict):
            return []
        entries: list[tuple[str, int]] = []
        node_ref = outlines.get("First")
        hops = 0
        while node_ref is not None and hops < 4096:
            hops += 1
            node = self.resolve(node_ref)
            if not isinstance(node, dict):
                break
            title_raw = self.resolve(node.get("Title"))
            title = _decode_text_string(title_raw) if isinstance(title_raw, bytes) else ""
            page_idx = self._dest_page(node)
            if title and page_idx is not None:
                entries.append((title, page_idx))
            node_ref = node.get("Next")
        return entries

    def _dest_page(self, node: dict) -> int | None:
        dest = self.resolve(node.get("Dest"))
        if dest is None:
            action = self.resolve(node.get("A"))
            if isinstance(action, dict) and action.get("S") in ("GoTo", Name("GoTo")):
                dest = self.resolve(action.get("D"))
        if isinstance(dest, (bytes, Name, str)):
            dest = self._named_destination(dest)
        if isinstance(dest, dict):
            dest = self.resolve(dest.get("D"))
        if isinstance(dest, list) and dest:
            return self.page_index_of(dest[0])
        return None

    def _named_destination(self, name: object) -> object:
        key = name.decode("latin-1") if isinstance(name, bytes) else str(name)
        root = self.resolve(self.trailer.get("Root"))
        if not isinstance(root, dict):
            return None
        dests = self.resolve(root.get("Dests"))
        if isinstance(dests, dict) and key in dests:
            return self.resolve(dests[key])
        names = self.resolve(root.get("Names"))
        if isinstance(names, dict):
            return self._name_tree_lookup(names.get("Dests"), key, depth=0)
        return None

    def _name_tree_lookup(self, node_ref: object, key: str, depth: int) -> object:
        if depth > 32:
            return None
        node = self.resolve(node_ref)
        if not isinstance(node, dict):
            return None
        pairs = self.resolve(node.get("Names"))
        if isinstance(pairs, list):
            for i in range(0, len(pairs) - 1, 2):
                k = self.resolve(pairs[i])
                k = k.decode("latin-1") if isinstance(k, bytes) else str(k)
                if k == key:
                    return self.resolve(pairs[i + 1])
        for kid in self.resolve(node.get("Kids")) or []:
            found = self._name_tree_lookup(kid, key, depth + 1)
            if found is not None:
                return found
        return None

    # -- text extraction ----------------------------------------------------------

    def page_text(self, index: int) -> str:
        """Raw text of one page: lines top-to-bottom, runs left-to-right."""
        page = self.pages[index]
        content = self.resolve(page.get("Contents"))
        chunks: list[bytes] = []
        if isinstance(content, list):
            for part in content:
                part = self.resolve(part)
                if isinstance(part, Stream):
                    chunks.append(self._decode_stream(part))
        elif isinstance(content, Stream):
            chunks.append(self._decode_stream(content))
        if not chunks:
            return ""
        fonts = self._page_fonts(page)
        runs = _extract_runs(b"\n".join(chunks), fonts)
        return _assemble_lines(runs)

    def _page_fonts(self, page: dict) -> dict[str, "_FontDecoder"]:
        resources = self.resolve(page.get("Resources"))
        out: dict[str, _FontDecoder] = {}
        if not isinstance(resources, dict):
            return out
        fonts = self.resolve(resources.get("Font"))
        if not isinstance(fonts, dict):
            return out
        for name, ref in fonts.items():
            font = self.resolve(ref)
            if isinstance(font, dict):
                out[str(name)] = _FontDecoder(self, font)
        return out


# --- text decoding -----------------------------------------------------------

_PDFDOC_OK = set(range(0x20, 0x7F))


def _decode_text_string(raw: bytes) -> str:
    if raw.startswith(b"\xfe\xff"):
        return raw[2:].decode("utf-16-be", "replace")
    return raw.decode("cp1252", "replace")


# Small Adobe-glyph-list subset: enough for /Differences seen in simple fonts.
_GLYPH_NAMES = {
    "space": " ", "exclam": "!", "quotedbl": '"', "numbersign": "#",
    "dollar": "$", "percent": "%", "ampersand": "&", "quotesingle": "'",
    "parenleft": "(", "parenright": ")", "asterisk": "*", "plus": "+",
    "comma": ",", "hyphen": "-", "period": ".", "slash": "/",
    "zero": "0", "one": "1", "two": "2", "three": "3", "four": "4",
    "five": "5", "six": "6", "seven": "7", "eight": "8", "nine": "9",
    "colon": ":", "semicolon": ";", "less": "<", "equal": "=",
    "greater": ">", "question": "?", "at": "@", "bracketleft": "[",
    "backslash": "\\", "bracketright": "]", "asciicircum": "^",
    "underscore": "_", "grave": "`", "braceleft": "{", "bar": "|",
    "braceright": "}", "asciitilde": "~", "quoteleft": "‘",
    "quoteright": "’", "quotedblleft": "“", "quotedblright": "”",
    "endash": "–", "emdash": "—", "bullet": "•",
    "ellipsis": "…", "fi": "ﬁ", "fl": "ﬂ",
    "adieresis": "ä", "odieresis": "ö", "udieresis": "ü",
    "Adieresis": "Ä", "Odieresis": "Ö", "Udieresis": "Ü",
    "eacute": "é", "egrave": "è", "agrave": "à",
    "ccedilla": "ç", "ntilde": "ñ", "germandbls": "ß",
    "degree": "°", "Euro": "€", "sterling": "£",
}


def _glyph_to_unicode(name: str) -> str:
    if len(name) == 1:
        return name
    if name in _GLYPH_NAMES:
        return _GLYPH_NAMES[name]
    if name.startswith("uni") and len(name) >= 7:
        try:
            return chr(int(name[3:7], 16))
        except ValueError:
            pass
    if name.startswith("u") and len(name) in (5, 7):
        try:
            return chr(int(name[1:], 16))
        except ValueError:
            pass
    return ""


def _base_table(encoding_name: str | None) -> list[str]:
    codec = {
        "WinAnsiEncoding": "cp1252",
        "MacRomanEncoding": "mac_roman",
    }.get(encoding_name or "", "cp1252")
    table = []
    for b in range(256):
        try:
            table.append(bytes([b]).decode(codec))
        except UnicodeDecodeError:
            table.append("")
    return table


class _FontDecoder:
    """Maps content-stream string bytes to Unicode for one font resource."""

    def __init__(self, reader: PdfReader, font: dict):
        self.two_byte = str(reader.resolve(font.get("Subtype"))) == "Type0"
        self.cmap: dict[int, str] = {}
        to_unicode = reader.resolve(font.get("ToUnicode"))
        if isinstance(to_unicode, Stream):
            try:
                self.cmap = _parse_tounicode(reader._decode_stream(to_unicode))
            except MalformedPdf:
                self.cmap = {}
        self.table: list[str] | None = None
        if not self.two_byte:
            encoding = reader.resolve(font.get("Encoding"))
            if isinstance(encoding, dict):
                table = _base_table(str(encoding.get("BaseEncoding") or ""))
                diffs = reader.resolve(encoding.get("Differences")) or []
                code = 0
                for item in diffs:
                    if isinstance(item, (int, float)):
                        code = int(item)
                    else:
                        table[code] = _glyph_to_unicode(str(item))
                        code += 1
                self.table = table
            else:
                self.table = _base_table(str(encoding) if encoding else None)

    def decode(self, raw: bytes) -> str:
        if self.two_byte:
            out = []
            for i in range(0, len(raw) - 1, 2):
                code = (raw[i] << 8) | raw[i + 1]
                out.append(self.cmap.get(code, ""))
            return "".join(out)
        if self.cmap:
            return "".join(self.cmap.get(b, self.table[b] if self.table else "") for b in raw)
        assert self.table is not None
        return "".join(self.table[b] for b in raw)


def _parse_tounicode(data: bytes) -> dict[int, str]:
    text = data.decode("latin-1", "replace")
    cmap: dict[int, str] = {}

    def utf16(hexstr: str) -> str:
        try:
            return bytes.fromhex(hexstr).decode("utf-16-be", "replace")
        except ValueError:
            return ""

    for block in re.findall(r"beginbfchar(.*?)endbfchar", text, re.S):
        for src, dst in re.findall(r"<([0-9A-Fa-f]+)>\s*<([0-9A-Fa-f]+)>", block):
            cmap[int(src, 16)] = utf16(dst)
    for block in re.findall(r"beginbfrange(.*?)endbfrange", text, re.S):
        for m in re.finditer(
            r"<([0-9A-Fa-f]+)>\s*<([0-9A-Fa-f]+)>\s*(?:<([0-9A-Fa-f]+)>|\[(.*?)\])",
            block,
            re.S,
        ):
            lo, hi = int(m.group(1), 16), int(m.group(2), 16)
            if hi - lo > 0xFFFF:
                continue
            if m.group(3) is not None:
                base_hex = m.group(3)
                width = len(base_hex)
                base = int(base_hex, 16)
                for code in range(lo, hi + 1):
                    cmap[code] = utf16(format(base + code - lo, f"0{width}x"))
            else:
                targets = re.findall(r"<([0-9A-Fa-f]+)>", m.group(4))
                for i, dst in enumerate(targets):
                    if lo + i <= hi:
                        cmap[lo + i] = utf16(dst)
    return cmap


# --- content interpretation ----------------------------------------------------

_IDENTITY = (1.0, 0.0, 0.0, 1.0, 0.0, 0.0)


def _mat_mul(m: tuple, n: tuple) -> tuple:
    a1, b1, c1, d1, e1, f1 = m
    a2, b2, c2, d2, e2, f2 = n
    return (
        a1 * a2 + b1 * c2,
        a1 * b2 + b1 * d2,
        c1 * a2 + d1 * c2,
        c1 * b2 + d1 * d2,
        e1 * a2 + f1 * c2 + e2,
        e1 * b2 + f1 * d2 + f2,
    )


@dataclass
class _Run:
    x: float
    y: float
    parts: list[str] = field(default_factory=list)

    @property
    def text(self) -> str:
        return "".join(self.parts)


def _extract_runs(content: bytes, fonts: dict[str, _FontDecoder]) -> list[_Run]:
    parser = _Parser(content)
    stack: list[object] = []
    runs: list[_Run] = []

    ctm = _IDENTITY
    ctm_stack: list[tuple] = []
    tm = tlm = _IDENTITY
    leading = 0.0
    font: _FontDecoder | None = None
    current: _Run | None = None

    def position() -> tuple[float, float]:
        m = _mat_mul(tm, ctm)
        return (m[4], m[5])

    def show(raw: bytes, fresh_position: bool) -> None:
        nonlocal current
        if font is None:
            return
        text = font.decode(raw)
        if not text:
            return
        if current is None or fresh_position:
            x, y = position()
            current = _Run(x, y)
            runs.append(current)
        current.parts.append(text)

    def td(tx: float, ty: float) -> None:
        nonlocal tm, tlm, current
        tlm = _mat_mul((1.0, 0.0, 0.0, 1.0, tx, ty), tlm)
        tm = tlm
        current = None

    while True:
        try:
            kind, value = parser._next()
        except MalformedPdf:
            break
        if kind == "end":
            break
        if kind != "kw":
            try:
                stack.append(parser._parse_from(kind, value))
            except MalformedPdf:
                stack.clear()
            continue

        op = value
        try:
            if op == b"BT":
                tm = tlm = _IDENTITY
                current = None
            elif op == b"ET":
                current = None
            elif op == b"Tf" and len(stack) >= 2:
                name = str(stack[-2])
                font = fonts.get(name, font)
            elif op == b"TL" and stack:
                leading = float(stack[-1])
            elif op == b"Td" and len(stack) >= 2:
                td(float(stack[-2]), float(stack[-1]))
            elif op == b"TD" and len(stack) >= 2:
                leading = -float(stack[-1])
                td(float(stack[-2]), float(stack[-1]))
            elif op == b"Tm" and len(stack) >= 6:
                tlm = tm = tuple(float(v) for v in stack[-6:])
                current = None
            elif op == b"T*":
                td(0.0, -leading)
            elif op == b"Tj" and stack:
                if isinstance(stack[-1], bytes):
                    show(stack[-1], fresh_position=current is None)
            elif op == b"'" and stack:
                td(0.0, -leading)
                if isinstance(stack[-1], bytes):
                    show(stack[-1], fresh_position=True)
            elif op == b'"' and len(stack) >= 3:
                td(0.0, -leading)
                if isinstance(stack[-1], bytes):
                    show(stack[-1], fresh_position=True)
            elif op == b"TJ" and stack and isinstance(stack[-1], list):
                fresh = current is None
                for item in stack[-1]:
                    if isinstance(item, bytes):
                        show(item, fresh_position=fresh)
                        fresh = False
                    elif isinstance(item, (int, float)) and item <= _TJ_SPACE_THRESHOLD:
                        if current is not None:
                            current.parts.append(" ")
            elif op == b"cm" and len(stack) >= 6:
                ctm = _mat_mul(tuple(float(v) for v in stack[-6:]), ctm)
            elif op == b"q":
                ctm_stack.append(ctm)
            elif op == b"Q":
                if ctm_stack:
                    ctm = ctm_stack.pop()
            elif op == b"BI":
                # Inline image: skip to the EI delimiter.
                data = parser.lex.data
                m = re.compile(rb"\bEI\b").search(data, parser.lex.pos)
                parser.lex.pos = m.end() if m else len(data)
                parser._pushback.clear()
        except (TypeError, ValueError):
            pass
        stack.clear()

    return runs


def _assemble_lines(runs: list[_Run]) -> str:
    runs = [r for r in runs if r.text.strip()]
    if not runs:
        return ""
    runs.sort(key=lambda r: (-r.y, r.x))
    lines: list[list[_Run]] = []
    for run in runs:
        if lines and abs(lines[-1][0].y - run.y) <= _LINE_TOLERANCE:
            lines[-1].append(run)
        else:
            lines.append([run])
    out = []
    for line in lines:
        line.sort(key=lambda r: r.x)
        out.append(" ".join(r.text for r in line))
    return "\n".join(out)
