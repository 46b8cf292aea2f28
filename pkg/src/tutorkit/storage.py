"""File-backed persistence for documents, sessions, profiles, and quiz state.

Layout under one data root:

    docs/<doc_id>/manifest.json     document metadata + section map
    docs/<doc_id>/pages.jsonl       one {page_number, text} object per page
    docs/<doc_id>/chunks.jsonl      one chunk object per line
    docs/<doc_id>/index.json        BM25 statistics
    sessions/<session_id>.jsonl     header line, then one message per line
    profiles/<learner_id>.json
    quiz/<learner_id>/<doc_id>/<section>.json

Every write lands in a temp file (or temp directory for ingests) and is
published with an atomic rename, so a crash mid-write never leaves a
partially visible document.
"""

from __future__ import annotations

import json
import logging
import os
import shutil
import threading
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import quote, unquote

from .errors import IndexNotBuilt
from .index import Bm25Index
from .ingest import (
    Chunk,
    DocSpan,
    ExtractedDocument,
    PageText,
    SectionRange,
    chunk as chunk_document,
    derive_doc_id,
    extract,
)
from .llm import ChatMessage
from .orchestrator import LearnerProfile
from .quiz import SectionQuizState

logger = logging.getLogger(__name__)


def fs_key(value: str) -> str:
    """Filesystem-safe encoding of client-supplied identifiers.

    Percent-encodes everything outside [A-Za-z0-9_-], including dots, so no
    identifier can traverse outside its directory.
    """
    return quote(value, safe="").replace(".", "%2E")


def fs_unkey(value: str) -> str:
    return unquote(value)


def _dump_json(data: object) -> str:
    return json.dumps(data, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def _dump_line(data: object) -> str:
    return json.dumps(data, ensure_ascii=False, sort_keys=True) + "\n"


def _atomic_write(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".tmp-{path.name}")
    tmp.write_text(content, encoding="utf-8")
    os.replace(tmp, path)


class DocumentStore:
    def __init__(self, root: Path):
        self.root = Path(root)
        self.docs_dir = self.root / "docs"
        self.sessions_dir = self.root / "sessions"
        self.profiles_dir = self.root / "profiles"
        self.quiz_dir = self.root / "quiz"
        for directory in (self.docs_dir, self.sessions_dir, self.profiles_dir, self.quiz_dir):
            directory.mkdir(parents=True, exist_ok=True)
        self._session_create_lock = threading.Lock()

    # -- startup hygiene ------------------------------------------------------

    def cleanup_partials(self) -> int:
        """Remove leftover temp directories/files from interrupted writes."""
        removed = 0
        for path in self.root.rglob(".tmp-*"):
            if path.is_dir():
                shutil.rmtree(path, ignore_errors=True)
            else:
                path.unlink(missing_ok=True)
            removed += 1
        for path in self.docs_dir.glob(".old-*"):
            shutil.rmtree(path, ignore_errors=True)
            removed += 1
        if removed:
            logger.info("cleaned %d partial artifacts from %s", removed, self.root)
        return removed

    # -- documents --------------------------------------------------------------

    def ingest_document(
        self,
        pdf_bytes: bytes,
        chunk_size: int = 1000,
        chunk_overlap: int = 200,
        title_hint: str | None = None,
    ) -> dict:
        """extract -> chunk -> index -> publish atomically; returns the manifest.

        The whole pipeline runs inside a dot-prefixed temp directory that only
        becomes the document directory via a final rename, so an interrupted
        ingest is never visible and gets swept by cleanup_partials().
        """
        doc_id = derive_doc_id(pdf_bytes)
        final_dir = self.docs_dir / doc_id
        tmp_dir = self.docs_dir / f".tmp-{doc_id}"
        if tmp_dir.exists():
            shutil.rmtree(tmp_dir)
        tmp_dir.mkdir(parents=True)
        try:
            doc = extract(pdf_bytes)
            if doc.title == "untitled" and title_hint:
                doc.title = title_hint
            chunks = chunk_document(doc, size=chunk_size, overlap=chunk_overlap)
            index = Bm25Index.build(chunks)
            manifest = {
                "doc_id": doc.doc_id,
                "title": doc.title,
                "created_at": doc.created_at,
                "page_count": len(doc.pages),
                "section_map": [
                    {"label": s.label, "start_page": s.start_page, "end_page": s.end_page}
                    for s in doc.section_map
                ],
            }
            (tmp_dir / "pages.jsonl").write_text(
                "".join(
                    _dump_line({"page_number": p.page_number, "text": p.text})
                    for p in doc.pages
                ),
                encoding="utf-8",
            )
            (tmp_dir / "chunks.jsonl").write_text(
                "".join(
                    _dump_line(
                        {
                            "chunk_id": c.chunk_id,
                            "doc_id": c.doc_id,
                            "span": c.span.to_dict(),
                            "text": c.text,
                            "token_count": c.token_count,
                        }
                    )
                    for c in chunks
                ),
                encoding="utf-8",
            )
            (tmp_dir / "index.json").write_text(
                _dump_json(index.to_dict()), encoding="utf-8"
            )
            # manifest last: its presence marks the directory complete
            (tmp_dir / "manifest.json").write_text(
                _dump_json(manifest), encoding="utf-8"
            )
            if final_dir.exists():
                old = self.docs_dir / f".old-{doc_id}"
                if old.exists():
                    shutil.rmtree(old)
                os.rename(final_dir, old)
                os.rename(tmp_dir, final_dir)
                shutil.rmtree(old, ignore_errors=True)
            else:
                os.rename(tmp_dir, final_dir)
        except BaseException:
            shutil.rmtree(tmp_dir, ignore_errors=True)
            raise
        return manifest

    def document_exists(self, doc_id: str) -> bool:
        return (self.docs_dir / fs_key(doc_id) / "manifest.json").is_file()

    def list_documents(self) -> list[dict]:
        manifests = []
        for entry in sorted(self.docs_dir.iterdir()):
            if entry.name.startswith("."):
                continue
            manifest_path = entry / "manifest.json"
            if manifest_path.is_file():
                manifests.append(json.loads(manifest_path.read_text(encoding="utf-8")))
        return manifests

    def load_manifest(self, doc_id: str) -> dict | None:
        path = self.docs_dir / fs_key(doc_id) / "manifest.json"
        if not path.is_file():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def load_document(self, doc_id: str) -> ExtractedDocument | None:
        manifest = self.load_manifest(doc_id)
        if manifest is None:
            return None
        pages_path = self.docs_dir / fs_key(doc_id) / "pages.jsonl"
        pages = [
            PageText.of(int(rec["page_number"]), rec["text"])
            for rec in _read_jsonl(pages_path)
        ]
        return ExtractedDocument(
            doc_id=manifest["doc_id"],
            title=manifest["title"],
            pages=pages,
            created_at=manifest["created_at"],
            section_map=[
                SectionRange(s["label"], int(s["start_page"]), int(s["end_page"]))
                for s in manifest["section_map"]
            ],
        )

    def load_chunks(self, doc_id: str) -> list[Chunk]:
        path = self.docs_dir / fs_key(doc_id) / "chunks.jsonl"
        return [
            Chunk(
                chunk_id=rec["chunk_id"],
                doc_id=rec["doc_id"],
                span=DocSpan.from_dict(rec["span"]),
                text=rec["text"],
                token_count=int(rec["token_count"]),
            )
            for rec in _read_jsonl(path)
        ]

    def load_index(self, doc_id: str) -> Bm25Index:
        path = self.docs_dir / fs_key(doc_id) / "index.json"
        if not path.is_file():
            raise IndexNotBuilt(f"document {doc_id} has no index")
        return Bm25Index.from_dict(json.loads(path.read_text(encoding="utf-8")))

    # -- sessions ---------------------------------------------------------------

    def create_session(self, learner_id: str, doc_id: str) -> str:
        with self._session_create_lock:
            count = sum(1 for _ in self.sessions_dir.glob("s*.jsonl"))
            session_id = f"s{count + 1:06d}"
            header = {
                "session_id": session_id,
                "learner_id": learner_id,
                "doc_id": doc_id,
                "created_at": datetime.now(timezone.utc).isoformat(),
            }
            _atomic_write(self.sessions_dir / f"{session_id}.jsonl", _dump_line(header))
        return session_id

    def load_session(self, session_id: str) -> tuple[dict, list[ChatMessage]] | None:
        path = self.sessions_dir / f"{fs_key(session_id)}.jsonl"
        if not path.is_file():
            return None
        records = _read_jsonl(path)
        if not records:
            return None
        header, messages = records[0], records[1:]
        return header, [ChatMessage(m["role"], m["content"]) for m in messages]

    def append_messages(self, session_id: str, messages: list[ChatMessage]) -> None:
        path = self.sessions_dir / f"{fs_key(session_id)}.jsonl"
        with path.open("a", encoding="utf-8") as fh:
            for m in messages:
                fh.write(_dump_line({"role": m.role, "content": m.content}))

    # -- profiles -----------------------------------------------------------------

    def save_profile(self, profile: LearnerProfile) -> None:
        path = self.profiles_dir / f"{fs_key(profile.learner_id)}.json"
        _atomic_write(
            path,
            _dump_json(
                {
                    "learner_id": profile.learner_id,
                    "interests": list(profile.interests),
                    "display_name": profile.display_name,
                }
            ),
        )

    def load_profile(self, learner_id: str) -> LearnerProfile:
        path = self.profiles_dir / f"{fs_key(learner_id)}.json"
        if not path.is_file():
            return LearnerProfile(learner_id=learner_id)
        data = json.loads(path.read_text(encoding="utf-8"))
        return LearnerProfile(
            learner_id=data["learner_id"],
            interests=tuple(data.get("interests") or ()),
            display_name=data.get("display_name"),
        )

    # -- quiz state -----------------------------------------------------------------

    def _quiz_path(self, learner_id: str, doc_id: str, section_label: str) -> Path:
        return (
            self.quiz_dir
            / fs_key(learner_id)
            / fs_key(doc_id)
            / f"{fs_key(section_label)}.json"
        )

    def load_quiz_state(
        self, learner_id: str, doc_id: str, section_label: str
    ) -> SectionQuizState | None:
        path = self._quiz_path(learner_id, doc_id, section_label)
        if not path.is_file():
            return None
        return SectionQuizState.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def save_quiz_state(self, learner_id: str, state: SectionQuizState) -> None:
        path = self._quiz_path(learner_id, state.doc_id, state.section_label)
        _atomic_write(path, _dump_json(state.to_dict()))

    def find_card(
        self, learner_id: str, card_id: str
    ) -> tuple[SectionQuizState, str] | None:
        """Scan a learner's quiz states for a card id; returns (state, card_id)."""
        learner_dir = self.quiz_dir / fs_key(learner_id)
        if not learner_dir.is_dir():
            return None
        for path in sorted(learner_dir.rglob("*.json")):
            state = SectionQuizState.from_dict(json.loads(path.read_text(encoding="utf-8")))
            for card in state.cards:
                if card.card_id == card_id:
                    return state, card_id
        return None


def _read_jsonl(path: Path) -> list[dict]:
    if not path.is_file():
        return []
    records = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            records.append(json.loads(line))
    return records
