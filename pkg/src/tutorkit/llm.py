"""Completion gateway: one seam for chat-completion providers.

Ships two implementations behind the same contract: an HTTP adapter for any
chat-completions-compatible endpoint (JSON request, SSE stream response) and
a deterministic mock whose scripted behavior makes the whole pipeline
verifiable offline. Both emit deltas whose concatenation equals the returned
text, with exactly one final delta carrying the finish reason.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from typing import Callable, Protocol

import httpx

from . import prompts
from .config import Settings
from .errors import ProviderError, ProviderUnreachable, Timeout

logger = logging.getLogger(__name__)

VALID_ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in VALID_ROLES:
            raise ValueError(f"bad role {self.role!r}")
        if self.role in ("system", "user") and not self.content:
            raise ValueError(f"{self.role} message must not be empty")


@dataclass(frozen=True)
class CompletionRequest:
    messages: tuple[ChatMessage, ...]
    max_output_tokens: int
    temperature: float = 0.2
    stream: bool = True

    def __post_init__(self) -> None:
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        system_positions = [i for i, m in enumerate(self.messages) if m.role == "system"]
        if system_positions and system_positions != [0]:
            raise ValueError("a system message must be first and unique")


@dataclass(frozen=True)
class CompletionDelta:
    text_fragment: str
    is_final: bool
    finish_reason: str | None = None  # stop | length | error, final deltas only


DeltaSink = Callable[[CompletionDelta], None]


def count_tokens(text: str) -> int:
    """Approximate token count: whitespace words times 4/3, rounded up.

    Budget accounting only; provider-side truncation always uses the real
    max_output_tokens limit.
    """
    words = len(text.split())
    return (4 * words + 2) // 3


class LlmGateway(Protocol):
    def complete(
        self, req: CompletionRequest, sink: DeltaSink | None = None
    ) -> tuple[str, str]:
        """Run one completion; returns (full_text, finish_reason)."""
        ...


def _emit(fragments: list[str], finish_reason: str, sink: DeltaSink | None) -> None:
    if sink is None:
        return
    if not fragments:
        fragments = [""]
    for frag in fragments[:-1]:
        sink(CompletionDelta(frag, is_final=False))
    sink(CompletionDelta(fragments[-1], is_final=True, finish_reason=finish_reason))


class MockLlmGateway:
    """Scripted, fully deterministic gateway for offline operation.

    Behavior keys off the last user message:
      - ``MOCK:ECHO <x>``       -> replies ``<x>``
      - summarize directive or ``MOCK:SUMMARY``
                                -> first sentence of each context block, in order
      - quiz directive or ``MOCK:QUIZ n``
                                -> n Q/A pairs; question i is the first 8 words
                                   of context block i (cycling)
      - ``MOCK:HISTLEN``        -> the number of messages in the request
      - anything else           -> "ANSWER: " + first 20 words of the first
                                   context block + a REFS trailer naming the
                                   first two block ids
    """

    _ECHO_RE = re.compile(r"MOCK:ECHO ([^\n]*)")

    def complete(
        self, req: CompletionRequest, sink: DeltaSink | None = None
    ) -> tuple[str, str]:
        reply = self._script(req)
        reply, finish = _truncate_words(reply, req.max_output_tokens)
        _emit(_fragment(reply), finish, sink)
        return reply, finish

    def _script(self, req: CompletionRequest) -> str:
        last_user = next((m for m in reversed(req.messages) if m.role == "user"), None)
        directive = last_user.content if last_user else ""
        echo = self._ECHO_RE.search(directive)
        if echo:
            return echo.group(1)
        if "MOCK:HISTLEN" in directive:
            return str(len(req.messages))
        if directive.startswith(prompts.REF_SUMMARY_DIRECTIVE):
            payload = directive[len(prompts.REF_SUMMARY_DIRECTIVE):]
            return prompts.first_sentence(payload)

        blocks = prompts.parse_blocks("\n\n".join(m.content for m in req.messages))
        if prompts.wants_summary(directive):
            if not blocks:
                return "No context to summarize."
            return " ".join(prompts.first_sentence(text) for _, text in blocks)
        n_pairs = prompts.quiz_pair_count(directive)
        if n_pairs is not None:
            if not blocks:
                return "No context for quiz generation."
            pairs = []
            for i in range(n_pairs):
                _, text = blocks[i % len(blocks)]
                question = " ".join(text.split()[:8])
                pairs.append(f"Q: {question}\nA: {prompts.first_sentence(text)}")
            return "\n\n".join(pairs)
        if not blocks:
            return "ANSWER: I could not find relevant context for this request."
        first_words = " ".join(blocks[0][1].split()[:20])
        ref_ids = ",".join(cid for cid, _ in blocks[:2])
        return f"ANSWER: {first_words}\nREFS: {ref_ids}"


def _truncate_words(reply: str, max_output_tokens: int) -> tuple[str, str]:
    if count_tokens(reply) <= max_output_tokens:
        return reply, "stop"
    keep = (3 * max_output_tokens) // 4
    spans = list(re.finditer(r"\S+", reply))[:keep]
    return (reply[: spans[-1].end()] if spans else ""), "length"


def _fragment(reply: str, words_per_delta: int = 2) -> list[str]:
    pieces = re.findall(r"\S+\s*", reply)
    return [
        "".join(pieces[i:i + words_per_delta])
        for i in range(0, len(pieces), words_per_delta)
    ]


class HttpLlmGateway:
    """Adapter for chat-completions-compatible HTTP endpoints."""

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str = "",
        timeout_secs: float = 60.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.timeout_secs = timeout_secs

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def _payload(self, req: CompletionRequest) -> dict:
        return {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in req.messages],
            "max_tokens": req.max_output_tokens,
            "temperature": req.temperature,
            "stream": req.stream,
        }

    def complete(
        self, req: CompletionRequest, sink: DeltaSink | None = None
    ) -> tuple[str, str]:
        url = f"{self.base_url}/chat/completions"
        try:
            with httpx.Client(timeout=self.timeout_secs) as client:
                if req.stream:
                    return self._complete_streaming(client, url, req, sink)
                return self._complete_plain(client, url, req, sink)
        except httpx.TimeoutException as exc:
            raise Timeout(f"provider did not answer within {self.timeout_secs}s") from exc
        except httpx.TransportError as exc:
            raise ProviderUnreachable(str(exc)) from exc

    def _complete_plain(
        self, client: httpx.Client, url: str, req: CompletionRequest, sink: DeltaSink | None
    ) -> tuple[str, str]:
        resp = client.post(url, json=self._payload(req), headers=self._headers())
        if resp.status_code >= 400:
            raise ProviderError(resp.status_code, resp.text[:300])
        body = resp.json()
        choice = (body.get("choices") or [{}])[0]
        text = (choice.get("message") or {}).get("content") or ""
        finish = choice.get("finish_reason") or "stop"
        _emit([text], finish, sink)
        return text, finish

    def _complete_streaming(
        self, client: httpx.Client, url: str, req: CompletionRequest, sink: DeltaSink | None
    ) -> tuple[str, str]:
        parts: list[str] = []
        finish = "stop"
        with client.stream(
            "POST", url, json=self._payload(req), headers=self._headers()
        ) as resp:
            if resp.status_code >= 400:
                resp.read()
                raise ProviderError(resp.status_code, resp.text[:300])
            for line in resp.iter_lines():
                if not line.startswith("data:"):
                    continue
                payload = line[len("data:"):].strip()
                if payload == "[DONE]":
                    break
                try:
                    event = json.loads(payload)
                except json.JSONDecodeError:
                    logger.warning("skipping unparseable SSE payload: %.80s", payload)
                    continue
                choice = (event.get("choices") or [{}])[0]
                fragment = (choice.get("delta") or {}).get("content")
                if fragment:
                    parts.append(fragment)
                    if sink is not None:
                        sink(CompletionDelta(fragment, is_final=False))
                if choice.get("finish_reason"):
                    finish = choice["finish_reason"]
        if sink is not None:
            sink(CompletionDelta("", is_final=True, finish_reason=finish))
        return "".join(parts), finish


def create_gateway(settings: Settings) -> LlmGateway:
    if settings.mock_llm:
        return MockLlmGateway()
    return HttpLlmGateway(
        base_url=settings.llm_base_url,
        model=settings.llm_model,
        api_key=settings.llm_api_key,
        timeout_secs=settings.llm_timeout_secs,
    )
