"""Prompt assembly and grounded answering over retrieved chunks.

An answer flows: retrieve -> assemble prompt (persona, grounding directive,
personalization, ranked context blocks under a token budget) -> stream the
completion -> parse the trailing REFS line into References -> attach
highlight spans located for each reference's verbatim excerpt.
"""

from __future__ import annotations

import hashlib
import logging
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable

from . import prompts
from .config import Settings
from .errors import GatewayError, QueryMissing, SelectionMissing
from .index import Bm25Index, tokenize
from .ingest import Chunk, DocSpan, ExtractedDocument
from .llm import (
    ChatMessage,
    CompletionDelta,
    CompletionRequest,
    DeltaSink,
    LlmGateway,
    count_tokens,
)
from .locate import HighlightSpan, locate

logger = logging.getLogger(__name__)

REFUSAL_TEXT = "I couldn't find this in the reading."
VERBATIM_CLIP_CHARS = 400

ACTION_KINDS = ("chat", "summarize", "explain", "quiz_generate")
SELECTION_KINDS = ("summarize", "explain")


@dataclass(frozen=True)
class LearnerProfile:
    learner_id: str
    interests: tuple[str, ...] = ()
    display_name: str | None = None

    def __post_init__(self) -> None:
        for interest in self.interests:
            if not interest or interest != interest.strip():
                raise ValueError(f"interest {interest!r} must be non-empty and trimmed")


@dataclass(frozen=True)
class AgentAction:
    kind: str
    selection: DocSpan | None = None
    query: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ACTION_KINDS:
            raise ValueError(f"unknown action kind {self.kind!r}")
        if self.kind == "chat" and not self.query:
            raise QueryMissing("chat actions require a query")
        if self.kind in SELECTION_KINDS and self.selection is None:
            raise SelectionMissing(f"{self.kind} actions require a selection")


@dataclass(frozen=True)
class Reference:
    chunk_id: str
    verbatim: str
    summary: str
    score: float
    spans: tuple[HighlightSpan, ...]

    def to_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "verbatim": self.verbatim,
            "summary": self.summary,
            "score": self.score,
            "spans": [s.to_dict() for s in self.spans],
        }


@dataclass(frozen=True)
class Answer:
    answer_id: str
    text: str
    references: tuple[Reference, ...]
    finish_reason: str
    created_at: str

    def to_dict(self) -> dict:
        return {
            "answer_id": self.answer_id,
            "text": self.text,
            "references": [r.to_dict() for r in self.references],
            "finish_reason": self.finish_reason,
            "created_at": self.created_at,
        }


# --- trailer handling -------------------------------------------------------

_TRAILER_RE = re.compile(r"(?:^|\n)\s*REFS:\s*([^\n]*)$")
_TRAILER_MARK = "REFS:"


def strip_trailer(text: str) -> tuple[str, list[str] | None]:
    """Remove a final `REFS: id,...` line; returns (clean_text, ids or None)."""
    stripped = text.rstrip()
    m = _TRAILER_RE.search(stripped)
    if m is None:
        return text, None
    ids = [part.strip() for part in m.group(1).split(",") if part.strip()]
    return stripped[: m.start()].rstrip(), ids


def _could_become_trailer(tail: str) -> bool:
    lstripped = tail.lstrip()
    if not lstripped:
        return True
    if len(lstripped) < len(_TRAILER_MARK):
        return _TRAILER_MARK.startswith(lstripped)
    if not lstripped.startswith(_TRAILER_MARK):
        return False
    after_newline = lstripped[len(_TRAILER_MARK):].partition("\n")[2]
    return after_newline.strip() == ""


class TrailerFilter:
    """Streams fragments onward while withholding a possible REFS trailer.

    Feed raw completion fragments; only text that can no longer be part of a
    trailing REFS line is emitted. finish() flushes whatever of the final
    trailer-stripped answer text has not been emitted yet, guaranteeing that
    emitted text concatenates to exactly the answer text.
    """

    def __init__(self, emit: Callable[[str], None]):
        self._emit = emit
        self._pending = ""
        self._emitted = 0

    def feed(self, fragment: str) -> None:
        self._pending += fragment
        safe_end = len(self._pending)
        for i in range(len(self._pending)):
            if _could_become_trailer(self._pending[i:]):
                safe_end = i
                break
        if safe_end > 0:
            self._emit(self._pending[:safe_end])
            self._emitted += safe_end
            self._pending = self._pending[safe_end:]

    def finish(self, answer_text: str) -> None:
        remainder = answer_text[self._emitted:]
        if remainder:
            self._emit(remainder)
        self._pending = ""
        self._emitted = len(answer_text)


# --- helpers ---------------------------------------------------------------


def clip_at_token_boundary(text: str, limit: int = VERBATIM_CLIP_CHARS) -> str:
    """Longest prefix of text ending on a token boundary within the limit."""
    if len(text) <= limit:
        return text
    cut = 0
    for token in tokenize(text).tokens:
        if token.end > limit:
            break
        cut = token.end
    return text[:cut] if cut else text[:limit]


@dataclass
class AssembledPrompt:
    request: CompletionRequest
    context: list[tuple[Chunk, float]] = field(default_factory=list)


class Orchestrator:
    def __init__(self, gateway: LlmGateway, settings: Settings):
        self.gateway = gateway
        self.settings = settings

    # -- prompt assembly ------------------------------------------------------

    def assemble_prompt(
        self,
        action: AgentAction,
        retrieved: list[tuple[Chunk, float]],
        profile: LearnerProfile,
        history: list[ChatMessage],
        selection_text: str | None = None,
    ) -> AssembledPrompt:
        if action.kind == "chat" and not action.query:
            raise QueryMissing("chat actions require a query")
        if action.kind in SELECTION_KINDS and not selection_text:
            raise SelectionMissing("selection text is required for this action")

        if action.kind == "summarize":
            user_text = f"{prompts.SUMMARIZE_DIRECTIVE}\n{selection_text}"
            tail: list[ChatMessage] = [ChatMessage("user", user_text)]
        elif action.kind == "explain":
            user_text = f"{prompts.EXPLAIN_DIRECTIVE}\n{selection_text}"
            tail = [ChatMessage("user", user_text)]
        else:
            tail = list(history[-self.settings.history_window:])
            tail.append(ChatMessage("user", action.query or ""))

        directives = [prompts.PERSONA, prompts.GROUNDING]
        if profile.interests:
            directives.append(
                prompts.PERSONALIZATION_TEMPLATE.format(
                    interests=", ".join(profile.interests)
                )
            )
        preamble = " ".join(directives)

        # Lowest-ranked context blocks drop whole until the prompt fits the
        # token budget; blocks are never split.
        included = list(retrieved)
        while True:
            system_text = self._render_system(preamble, included)
            msgs = (ChatMessage("system", system_text), *tail)
            total = sum(count_tokens(m.content) for m in msgs)
            if total <= self.settings.prompt_token_budget or not included:
                break
            included.pop()
        request = CompletionRequest(
            messages=msgs,
            max_output_tokens=self.settings.max_output_tokens,
            temperature=self.settings.temperature,
            stream=True,
        )
        return AssembledPrompt(request=request, context=included)

    @staticmethod
    def _render_system(preamble: str, blocks: list[tuple[Chunk, float]]) -> str:
        if not blocks:
            return preamble
        rendered = "\n\n".join(
            prompts.render_block(chunk.chunk_id, chunk.text) for chunk, _ in blocks
        )
        return f"{preamble}\n\nContext:\n\n{rendered}"

    # -- answering --------------------------------------------------------------

    def answer(
        self,
        action: AgentAction,
        doc: ExtractedDocument,
        chunks: list[Chunk],
        index: Bm25Index,
        profile: LearnerProfile,
        history: list[ChatMessage] | None = None,
        sink: DeltaSink | None = None,
        answer_id: str | None = None,
    ) -> Answer:
        history = history or []
        selection_text: str | None = None
        if action.kind in SELECTION_KINDS:
            assert action.selection is not None  # guaranteed by AgentAction
            selection_text = doc.slice_span(action.selection)
            retrieval_query = selection_text
        else:
            if not action.query:
                raise QueryMissing("chat actions require a query")
            retrieval_query = action.query

        if answer_id is None:
            answer_id = "a" + hashlib.sha256(
                f"{doc.doc_id}/{action.kind}/{retrieval_query}/{len(history)}".encode()
            ).hexdigest()[:12]
        created_at = datetime.now(timezone.utc).isoformat()

        hits = index.search(retrieval_query, k=self.settings.retrieval_k)
        chunk_map = {c.chunk_id: c for c in chunks}
        retrieved = [(chunk_map[h.chunk_id], h.score) for h in hits if h.chunk_id in chunk_map]

        if not retrieved and action.kind == "chat":
            # Never call the model with an empty context.
            if sink is not None:
                sink(CompletionDelta(REFUSAL_TEXT, is_final=True, finish_reason="stop"))
            return Answer(answer_id, REFUSAL_TEXT, (), "stop", created_at)

        assembled = self.assemble_prompt(
            action, retrieved, profile, history, selection_text=selection_text
        )

        collected: list[str] = []

        def tee(delta: CompletionDelta) -> None:
            collected.append(delta.text_fragment)
            if sink is not None:
                sink(delta)

        try:
            full_text, finish = self.gateway.complete(assembled.request, tee)
        except GatewayError as exc:
            logger.warning("gateway failure during answer %s: %s", answer_id, exc)
            partial, _ = strip_trailer("".join(collected))
            return Answer(answer_id, partial, (), "error", created_at)

        clean_text, trailer_ids = strip_trailer(full_text)
        included_ids = {chunk.chunk_id for chunk, _ in assembled.context}
        ref_ids = [i for i in (trailer_ids or []) if i in included_ids]
        if not ref_ids:
            ref_ids = [
                chunk.chunk_id
                for chunk, _ in assembled.context[: self.settings.surfaced_references]
            ]
        score_by_id = {h.chunk_id: h.score for h in hits}
        references = tuple(
            self._build_reference(doc, chunk_map[cid], score_by_id.get(cid, 0.0))
            for cid in ref_ids
        )
        return Answer(answer_id, clean_text, references, finish, created_at)

    def _build_reference(
        self, doc: ExtractedDocument, chunk: Chunk, score: float
    ) -> Reference:
        verbatim = clip_at_token_boundary(chunk.text)
        summary = self._reference_summary(chunk)
        spans = locate(doc, verbatim, tau=self.settings.locate_tau).spans
        return Reference(
            chunk_id=chunk.chunk_id,
            verbatim=verbatim,
            summary=summary,
            score=score,
            spans=spans,
        )

    def _reference_summary(self, chunk: Chunk) -> str:
        if self.settings.ref_summary == "llm":
            req = CompletionRequest(
                messages=(
                    ChatMessage(
                        "user", f"{prompts.REF_SUMMARY_DIRECTIVE} {chunk.text}"
                    ),
                ),
                max_output_tokens=64,
                temperature=self.settings.temperature,
                stream=False,
            )
            try:
                text, _ = self.gateway.complete(req)
                if text.strip():
                    return text.strip()
            except GatewayError as exc:
                logger.warning(
                    "reference summary completion failed for %s: %s", chunk.chunk_id, exc
                )
        return prompts.first_sentence(chunk.text)
