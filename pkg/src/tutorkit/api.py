"""HTTP service: document upload, streamed chat and highlight actions over
SSE, quiz endpoints, and learner profiles.

Endpoints validate everything they can before a stream opens (unknown ids,
bad selections) so those failures surface as plain HTTP errors; failures
inside an open stream become a final `event: error` frame.
"""

from __future__ import annotations

import hashlib
import json
import logging
import queue
import secrets
import threading
from typing import Iterator

from fastapi import FastAPI, HTTPException, Request, Response, UploadFile
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from .config import Settings
from .errors import (
    GenerationFailed,
    MalformedPdf,
    NoTextLayer,
    TutorkitError,
)
from .ingest import Chunk, DocSpan, ExtractedDocument
from .llm import ChatMessage, LlmGateway, create_gateway
from .orchestrator import AgentAction, LearnerProfile, Orchestrator, TrailerFilter
from .quiz import QuizConfig, QuizEngine, SectionQuizState, record_answer
from .storage import DocumentStore

logger = logging.getLogger(__name__)

ACTION_KINDS = ("summarize", "explain")


class SessionCreateBody(BaseModel):
    learner_id: str
    doc_id: str


class ChatBody(BaseModel):
    query: str


class SelectionBody(BaseModel):
    page: int
    start: int
    end: int


class ActionBody(BaseModel):
    kind: str
    selection: SelectionBody
    learner_id: str | None = None


class QuizNextBody(BaseModel):
    learner_id: str
    section: str


class QuizAnswerBody(BaseModel):
    learner_id: str
    result: str


class ProfileBody(BaseModel):
    interests: list[str]
    display_name: str | None = None


class _LockRegistry:
    def __init__(self) -> None:
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def get(self, key: str) -> threading.Lock:
        with self._guard:
            if key not in self._locks:
                self._locks[key] = threading.Lock()
            return self._locks[key]


def _sse(name: str, payload: dict) -> str:
    return f"event: {name}\ndata: {json.dumps(payload, ensure_ascii=False)}\n\n"


def create_app(
    settings: Settings | None = None, gateway: LlmGateway | None = None
) -> FastAPI:
    settings = settings or Settings.from_env()
    store = DocumentStore(settings.data_dir)
    store.cleanup_partials()
    gateway = gateway or create_gateway(settings)
    orchestrator = Orchestrator(gateway, settings)
    quiz_engine = QuizEngine(gateway, max_output_tokens=settings.max_output_tokens)
    session_locks = _LockRegistry()
    quiz_locks = _LockRegistry()

    app = FastAPI(title="tutorkit", version="0.1.0")

    # -- helpers ---------------------------------------------------------------

    def require_document(doc_id: str) -> ExtractedDocument:
        doc = store.load_document(doc_id)
        if doc is None:
            raise HTTPException(status_code=404, detail=f"unknown document {doc_id}")
        return doc

    def section_seed(learner_id: str, doc_id: str, section: str) -> int:
        if settings.rng_seed is None:
            return secrets.randbits(63)
        digest = hashlib.sha256(
            f"{settings.rng_seed}/{learner_id}/{doc_id}/{section}".encode()
        ).digest()
        return int.from_bytes(digest[:8], "big") >> 1

    def section_chunks(doc: ExtractedDocument, label: str) -> list[Chunk]:
        section = doc.section(label)
        if section is None:
            raise HTTPException(status_code=404, detail=f"unknown section {label!r}")
        return [
            c
            for c in store.load_chunks(doc.doc_id)
            if c.span.start_page <= section.end_page
            and c.span.end_page >= section.start_page
        ]

    def stream_response(worker) -> StreamingResponse:
        events: queue.Queue = queue.Queue()

        def run() -> None:
            try:
                worker(events)
            except TutorkitError as exc:
                events.put(("error", {"message": str(exc)}))
            except Exception:
                logger.exception("stream worker crashed")
                events.put(("error", {"message": "internal error"}))
            finally:
                events.put(None)

        threading.Thread(target=run, daemon=True).start()

        def generate() -> Iterator[str]:
            while True:
                item = events.get()
                if item is None:
                    return
                yield _sse(item[0], item[1])

        return StreamingResponse(generate(), media_type="text/event-stream")

    def run_answer(
        events: queue.Queue,
        action: AgentAction,
        doc: ExtractedDocument,
        profile,
        history: list[ChatMessage],
        on_success=None,
    ) -> None:
        chunks = store.load_chunks(doc.doc_id)
        index = store.load_index(doc.doc_id)
        trailer_filter = TrailerFilter(
            lambda text: events.put(("delta", {"text": text}))
        )
        answer = orchestrator.answer(
            action,
            doc,
            chunks,
            index,
            profile,
            history,
            sink=lambda delta: trailer_filter.feed(delta.text_fragment),
        )
        if answer.finish_reason == "error":
            events.put(("error", {"message": "completion provider failed"}))
            return
        trailer_filter.finish(answer.text)
        events.put(("answer", answer.to_dict()))
        if on_success is not None:
            on_success(answer)

    # -- documents ----------------------------------------------------------------

    @app.post("/documents", status_code=201)
    def upload_document(file: UploadFile):
        pdf_bytes = file.file.read()
        if len(pdf_bytes) > settings.max_upload_bytes:
            raise HTTPException(status_code=413, detail="document exceeds size cap")
        title_hint = None
        if file.filename:
            title_hint = file.filename.rsplit("/", 1)[-1].removesuffix(".pdf") or None
        try:
            manifest = store.ingest_document(
                pdf_bytes,
                chunk_size=settings.chunk_size,
                chunk_overlap=settings.chunk_overlap,
                title_hint=title_hint,
            )
        except (MalformedPdf, NoTextLayer) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {
            "doc_id": manifest["doc_id"],
            "title": manifest["title"],
            "pages": manifest["page_count"],
            "sections": manifest["section_map"],
        }

    @app.get("/documents")
    def list_documents():
        return store.list_documents()

    @app.get("/documents/{doc_id}")
    def get_document(doc_id: str):
        manifest = store.load_manifest(doc_id)
        if manifest is None:
            raise HTTPException(status_code=404, detail=f"unknown document {doc_id}")
        return manifest

    @app.get("/documents/{doc_id}/pages/{page_number}")
    def get_page(doc_id: str, page_number: int):
        doc = require_document(doc_id)
        if not 1 <= page_number <= len(doc.pages):
            raise HTTPException(status_code=404, detail=f"no page {page_number}")
        page = doc.page(page_number)
        return {
            "page_number": page.page_number,
            "text": page.text,
            "char_count": page.char_count,
        }

    # -- sessions & chat --------------------------------------------------------------

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionCreateBody):
        if not store.document_exists(body.doc_id):
            raise HTTPException(status_code=404, detail=f"unknown document {body.doc_id}")
        session_id = store.create_session(body.learner_id, body.doc_id)
        return {"session_id": session_id}

    @app.post("/sessions/{session_id}/chat")
    def chat(session_id: str, body: ChatBody):
        loaded = store.load_session(session_id)
        if loaded is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        header, _ = loaded
        doc = require_document(header["doc_id"])
        profile = store.load_profile(header["learner_id"])
        lock = session_locks.get(session_id)

        def worker(events: queue.Queue) -> None:
            with lock:
                _, history = store.load_session(session_id) or ({}, [])

                def persist(answer) -> None:
                    store.append_messages(
                        session_id,
                        [
                            ChatMessage("user", body.query),
                            ChatMessage("assistant", answer.text or "(no answer)"),
                        ],
                    )

                run_answer(
                    events,
                    AgentAction(kind="chat", query=body.query),
                    doc,
                    profile,
                    history,
                    on_success=persist,
                )

        return stream_response(worker)

    # -- highlight actions -------------------------------------------------------------

    @app.post("/documents/{doc_id}/actions")
    def document_action(doc_id: str, body: ActionBody):
        doc = require_document(doc_id)
        if body.kind not in ACTION_KINDS:
            raise HTTPException(
                status_code=400, detail=f"kind must be one of {ACTION_KINDS}"
            )
        sel = body.selection
        if not 1 <= sel.page <= len(doc.pages):
            raise HTTPException(status_code=400, detail="selection page out of range")
        char_count = doc.page(sel.page).char_count
        if not 0 <= sel.start < sel.end <= char_count:
            raise HTTPException(
                status_code=400,
                detail="selection offsets out of bounds or empty "
                "(single-page selections only)",
            )
        # The acted-on text is always sliced server-side from the stored
        # document; client-provided text is never trusted.
        action = AgentAction(
            kind=body.kind,
            selection=DocSpan(sel.page, sel.start, sel.page, sel.end),
        )
        if body.learner_id:
            resolved_profile = store.load_profile(body.learner_id)
        else:
            resolved_profile = LearnerProfile(learner_id="anonymous")

        def worker(events: queue.Queue) -> None:
            run_answer(events, action, doc, resolved_profile, [])

        return stream_response(worker)

    # -- quiz ---------------------------------------------------------------------------

    @app.post("/documents/{doc_id}/quiz/next")
    def quiz_next(doc_id: str, body: QuizNextBody):
        doc = require_document(doc_id)
        chunks = section_chunks(doc, body.section)
        lock = quiz_locks.get(f"{body.learner_id}/{doc_id}/{body.section}")
        with lock:
            state = store.load_quiz_state(body.learner_id, doc_id, body.section)
            if state is None:
                state = SectionQuizState(
                    doc_id=doc_id,
                    section_label=body.section,
                    rng_seed=section_seed(body.learner_id, doc_id, body.section),
                    config=QuizConfig(),
                )
            try:
                card = quiz_engine.next_card(state, chunks)
            except GenerationFailed as exc:
                raise HTTPException(status_code=502, detail=str(exc)) from exc
            finally:
                store.save_quiz_state(body.learner_id, state)
        payload = card.to_dict()
        del payload["answer_key"]  # withheld until the learner self-reports
        return payload

    @app.post("/quiz/{card_id}/answer")
    def quiz_answer(card_id: str, body: QuizAnswerBody):
        if body.result not in ("correct", "incorrect"):
            raise HTTPException(status_code=400, detail="result must be correct|incorrect")
        found = store.find_card(body.learner_id, card_id)
        if found is None:
            raise HTTPException(status_code=404, detail=f"unknown card {card_id}")
        state, _ = found
        lock = quiz_locks.get(
            f"{body.learner_id}/{state.doc_id}/{state.section_label}"
        )
        with lock:
            state = store.load_quiz_state(
                body.learner_id, state.doc_id, state.section_label
            )
            if state is None:
                raise HTTPException(status_code=404, detail=f"unknown card {card_id}")
            card = record_answer(state, card_id, body.result)
            store.save_quiz_state(body.learner_id, state)
        return {"box": card.box, "answer_key": card.answer_key}

    # -- profiles ------------------------------------------------------------------------

    @app.put("/profiles/{learner_id}")
    def put_profile(learner_id: str, body: ProfileBody):
        if len(body.interests) > 20:
            raise HTTPException(status_code=400, detail="at most 20 interests")
        cleaned = []
        for interest in body.interests:
            interest = interest.strip()
            if not interest or len(interest) > 64:
                raise HTTPException(
                    status_code=400,
                    detail="interests must be non-empty strings of at most 64 chars",
                )
            cleaned.append(interest)
        store.save_profile(
            LearnerProfile(
                learner_id=learner_id,
                interests=tuple(cleaned),
                display_name=body.display_name,
            )
        )
        return Response(status_code=204)

    @app.get("/profiles/{learner_id}")
    def get_profile(learner_id: str):
        profile = store.load_profile(learner_id)
        return {
            "learner_id": profile.learner_id,
            "interests": list(profile.interests),
            "display_name": profile.display_name,
        }

    @app.exception_handler(TutorkitError)
    def tutorkit_error_handler(request: Request, exc: TutorkitError):
        logger.warning("unhandled domain error: %s", exc)
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    app.state.settings = settings
    app.state.store = store
    return app
