"""Prompt fragments shared by the orchestrator, quiz engine, and mock gateway.

The deterministic mock recognizes these exact directive strings, so they live
in one place: changing a directive here keeps the offline pipeline coherent.
"""

from __future__ import annotations

import re

PERSONA = (
    "You are a teaching assistant embedded in this textbook. "
    "Help the learner understand the reading."
)
GROUNDING = (
    "Answer only from the provided context. "
    "End with `REFS: <id,...>` listing the context blocks you used."
)
PERSONALIZATION_TEMPLATE = (
    "When explaining concepts, use analogies drawn from: {interests}."
)
SUMMARIZE_DIRECTIVE = "Summarize the following passage concisely:"
EXPLAIN_DIRECTIVE = "Explain the following passage in simpler terms:"
QUIZ_DIRECTIVE_TEMPLATE = (
    "Write exactly {m} quiz question/answer pairs grounded in the context "
    "blocks above. Format each pair as 'Q: <question>' then 'A: <answer>' on "
    "the next line, with one blank line between pairs."
)
REF_SUMMARY_DIRECTIVE = "Summarize in one sentence:"

_BLOCK_RE = re.compile(r"\[\[chunk:([^\]\n]+)\]\]\n(.*?)(?=\n*\[\[chunk:|\Z)", re.S)
_QUIZ_COUNT_RE = re.compile(r"(?:MOCK:QUIZ|Write exactly)\s+(\d+)")


def render_block(chunk_id: str, text: str) -> str:
    return f"[[chunk:{chunk_id}]]\n{text}"


def parse_blocks(prompt_text: str) -> list[tuple[str, str]]:
    """Recover (chunk_id, text) pairs from rendered context blocks."""
    return [
        (m.group(1), m.group(2).strip()) for m in _BLOCK_RE.finditer(prompt_text)
    ]


def quiz_pair_count(message: str) -> int | None:
    m = _QUIZ_COUNT_RE.search(message)
    return int(m.group(1)) if m else None


def wants_summary(message: str) -> bool:
    return "MOCK:SUMMARY" in message or message.startswith(SUMMARIZE_DIRECTIVE)


_SENTENCE_END = re.compile(r"[.!?](?=[\s\"')\]]|$)")


def first_sentence(text: str) -> str:
    """Prefix of text through its first sentence-ending punctuation."""
    text = text.strip()
    m = _SENTENCE_END.search(text)
    return text[: m.end()].strip() if m else text
