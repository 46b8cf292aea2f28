"""Quiz card generation and Leitner-system scheduling per reading section.

Cards live in numbered boxes; wrong answers send a card back to box 1, right
answers promote it one box. Review sampling weights cards by their box so
weak material surfaces most. Fresh questions are generated with probability
p0 - n*delta (floored at zero), so novelty decays linearly until the section
runs entirely on its existing pool.

Randomness is derived per draw from sha256(seed, draw_count, purpose), which
keeps sequences reproducible across process restarts without serializing any
generator state.
"""

from __future__ import annotations

import hashlib
import logging
import re
from dataclasses import dataclass, field

from . import prompts
from .errors import GatewayError, GenerationFailed, UnknownCard
from .ingest import Chunk
from .llm import ChatMessage, CompletionRequest, LlmGateway
from .locate import normalize

logger = logging.getLogger(__name__)

RESULTS = ("correct", "incorrect")

_PAIR_RE = re.compile(r"\AQ:[ \t]*(\S[^\n]*)\nA:[ \t]*(\S.*)\Z", re.S)


@dataclass
class QuizConfig:
    p0: float = 1.0
    delta: float = 0.1
    boxes: int = 5
    box_weights: tuple[float, ...] = (16.0, 8.0, 4.0, 2.0, 1.0)

    def __post_init__(self) -> None:
        if not 0.0 <= self.p0 <= 1.0:
            raise ValueError("p0 must lie in [0, 1]")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.boxes < 2 or len(self.box_weights) != self.boxes:
            raise ValueError("need one weight per box and at least two boxes")
        if any(a <= b for a, b in zip(self.box_weights, self.box_weights[1:])):
            raise ValueError("box_weights must be strictly decreasing")

    def to_dict(self) -> dict:
        return {
            "p0": self.p0,
            "delta": self.delta,
            "boxes": self.boxes,
            "box_weights": list(self.box_weights),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QuizConfig":
        return cls(
            p0=float(data["p0"]),
            delta=float(data["delta"]),
            boxes=int(data["boxes"]),
            box_weights=tuple(float(w) for w in data["box_weights"]),
        )


@dataclass
class QuizCard:
    card_id: str
    doc_id: str
    section_label: str
    question: str
    answer_key: str
    box: int = 1
    last_result: str = "none"
    seen_count: int = 0
    created_ordinal: int = 0

    def to_dict(self) -> dict:
        return {
            "card_id": self.card_id,
            "doc_id": self.doc_id,
            "section_label": self.section_label,
            "question": self.question,
            "answer_key": self.answer_key,
            "box": self.box,
            "last_result": self.last_result,
            "seen_count": self.seen_count,
            "created_ordinal": self.created_ordinal,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QuizCard":
        return cls(
            card_id=data["card_id"],
            doc_id=data["doc_id"],
            section_label=data["section_label"],
            question=data["question"],
            answer_key=data["answer_key"],
            box=int(data["box"]),
            last_result=data["last_result"],
            seen_count=int(data["seen_count"]),
            created_ordinal=int(data["created_ordinal"]),
        )


@dataclass
class SectionQuizState:
    doc_id: str
    section_label: str
    rng_seed: int
    cards: list[QuizCard] = field(default_factory=list)
    generated_count: int = 0
    draw_count: int = 0
    config: QuizConfig = field(default_factory=QuizConfig)

    def card(self, card_id: str) -> QuizCard:
        for card in self.cards:
            if card.card_id == card_id:
                return card
        raise UnknownCard(card_id)

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "section_label": self.section_label,
            "rng_seed": self.rng_seed,
            "generated_count": self.generated_count,
            "draw_count": self.draw_count,
            "config": self.config.to_dict(),
            "cards": [c.to_dict() for c in self.cards],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SectionQuizState":
        return cls(
            doc_id=data["doc_id"],
            section_label=data["section_label"],
            rng_seed=int(data["rng_seed"]),
            cards=[QuizCard.from_dict(c) for c in data["cards"]],
            generated_count=int(data["generated_count"]),
            draw_count=int(data["draw_count"]),
            config=QuizConfig.from_dict(data["config"]),
        )


def _uniform(seed: int, draw: int, purpose: str) -> float:
    digest = hashlib.sha256(f"{seed}/{draw}/{purpose}".encode()).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


def p_novel(state: SectionQuizState) -> float:
    """Probability the next card is freshly generated; 1 on an empty pool."""
    if not state.cards:
        return 1.0
    return max(0.0, state.config.p0 - state.generated_count * state.config.delta)


def record_answer(state: SectionQuizState, card_id: str, result: str) -> QuizCard:
    """Apply a self-reported result: misses reset to box 1, hits promote."""
    if result not in RESULTS:
        raise ValueError(f"result must be one of {RESULTS}")
    card = state.card(card_id)
    if result == "incorrect":
        card.box = 1
    else:
        card.box = min(card.box + 1, state.config.boxes)
    card.seen_count += 1
    card.last_result = result
    return card


class QuizEngine:
    """Drives card generation through the gateway and weighted review draws."""

    def __init__(self, gateway: LlmGateway, max_output_tokens: int = 512):
        self.gateway = gateway
        self.max_output_tokens = max_output_tokens

    def next_card(
        self, state: SectionQuizState, section_chunks: list[Chunk]
    ) -> QuizCard:
        state.draw_count += 1
        u = _uniform(state.rng_seed, state.draw_count, "gate")
        if u < p_novel(state):
            try:
                fresh = self.generate_cards(state, 1, section_chunks)
            except (GenerationFailed, GatewayError) as exc:
                if not state.cards:
                    raise GenerationFailed(
                        f"generation failed with an empty pool: {exc}"
                    ) from exc
                logger.warning("generation failed, sampling pool instead: %s", exc)
                fresh = []
            if fresh:
                return fresh[0]
            if not state.cards:
                raise GenerationFailed("nothing generated and the pool is empty")
        return self._sample_existing(state)

    def _sample_existing(self, state: SectionQuizState) -> QuizCard:
        weights = state.config.box_weights
        ordered = sorted(
            state.cards,
            key=lambda c: (-weights[c.box - 1], c.seen_count, c.created_ordinal),
        )
        total = sum(weights[c.box - 1] for c in ordered)
        v = _uniform(state.rng_seed, state.draw_count, "pick") * total
        cumulative = 0.0
        for card in ordered:
            cumulative += weights[card.box - 1]
            if v < cumulative:
                return card
        return ordered[-1]

    def generate_cards(
        self, state: SectionQuizState, m: int, section_chunks: list[Chunk]
    ) -> list[QuizCard]:
        """Ask the gateway for m Q/A pairs; parse strictly, drop duplicates."""
        if not section_chunks:
            raise GenerationFailed(
                f"section {state.section_label!r} has no chunks to generate from"
            )
        # Rotate the anchor chunk by generation count so successive requests
        # target different parts of the section.
        offset = state.generated_count % len(section_chunks)
        rotated = section_chunks[offset:] + section_chunks[:offset]
        blocks = "\n\n".join(
            prompts.render_block(c.chunk_id, c.text) for c in rotated
        )
        request = CompletionRequest(
            messages=(
                ChatMessage(
                    "system",
                    "You write quiz cards for one section of a course reading.\n\n"
                    f"Context:\n\n{blocks}",
                ),
                ChatMessage("user", prompts.QUIZ_DIRECTIVE_TEMPLATE.format(m=m)),
            ),
            max_output_tokens=max(self.max_output_tokens, 64 * m),
            stream=False,
        )
        text, _ = self.gateway.complete(request)
        pairs = _parse_pairs(text)
        if not pairs:
            raise GenerationFailed("no well-formed question/answer pairs in reply")

        known = {normalize(card.question).text for card in state.cards}
        accepted: list[QuizCard] = []
        for question, answer in pairs:
            key = normalize(question).text
            if key in known:
                continue
            known.add(key)
            ordinal = state.generated_count
            card = QuizCard(
                card_id="q"
                + hashlib.sha256(
                    f"{state.doc_id}/{state.section_label}/{ordinal}".encode()
                ).hexdigest()[:12],
                doc_id=state.doc_id,
                section_label=state.section_label,
                question=question,
                answer_key=answer,
                created_ordinal=ordinal,
            )
            state.cards.append(card)
            state.generated_count += 1
            accepted.append(card)
        return accepted


def _parse_pairs(text: str) -> list[tuple[str, str]]:
    pairs = []
    for block in re.split(r"\n\s*\n", text.strip()):
        m = _PAIR_RE.match(block.strip())
        if m:
            pairs.append((m.group(1).strip(), m.group(2).strip()))
    return pairs
