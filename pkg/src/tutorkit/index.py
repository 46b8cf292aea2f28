"""Lexical BM25 index over document chunks.

Deterministic by construction: scores accumulate in a fixed order (chunks in
id order, query tokens in query order) and ties break on ascending chunk id,
so the same corpus and query always produce the same ranking, bit for bit.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, NamedTuple

from .errors import EmptyCorpus

if TYPE_CHECKING:
    from .ingest import Chunk

K1 = 1.2
B = 0.75

# Tokens are maximal runs of Unicode alphanumerics; everything else separates.
# [^\W_] is "word character minus underscore", i.e. letters and digits.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class Token(NamedTuple):
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class TokenStream:
    tokens: tuple[Token, ...]

    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]


def tokenize(text: str) -> TokenStream:
    """Lowercased alphanumeric runs with their source character spans.

    No stopword removal, no stemming: the same tokenizer backs both retrieval
    and reference location, where positions must stay faithful.
    """
    tokens = tuple(
        Token(m.group().lower(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)
    )
    return TokenStream(tokens)


@dataclass(frozen=True)
class ScoredChunk:
    chunk_id: str
    score: float
    rank: int


class Bm25Index:
    """Immutable BM25 statistics plus top-k search over one document."""

    def __init__(
        self,
        doc_count: int,
        avg_doc_len: float,
        doc_freq: dict[str, int],
        term_freq: dict[str, dict[str, int]],
    ):
        self.doc_count = doc_count
        self.avg_doc_len = avg_doc_len
        self.doc_freq = doc_freq
        self.term_freq = term_freq
        self.doc_len = {cid: sum(tf.values()) for cid, tf in term_freq.items()}
        self._chunk_order = sorted(term_freq)

    @classmethod
    def build(cls, chunks: Iterable["Chunk"]) -> "Bm25Index":
        term_freq: dict[str, dict[str, int]] = {}
        doc_freq: Counter[str] = Counter()
        for chunk in chunks:
            counts = Counter(tokenize(chunk.text).texts())
            term_freq[chunk.chunk_id] = dict(counts)
            doc_freq.update(counts.keys())
        if not term_freq:
            raise EmptyCorpus("cannot build an index over zero chunks")
        total_len = sum(sum(tf.values()) for tf in term_freq.values())
        return cls(
            doc_count=len(term_freq),
            avg_doc_len=total_len / len(term_freq),
            doc_freq=dict(doc_freq),
            term_freq=term_freq,
        )

    def idf(self, token: str) -> float:
        df = self.doc_freq.get(token, 0)
        return math.log(1.0 + (self.doc_count - df + 0.5) / (df + 0.5))

    def score(self, query_tokens: list[str], chunk_id: str) -> float:
        tf_map = self.term_freq[chunk_id]
        dl = self.doc_len[chunk_id]
        norm = K1 * (1.0 - B + B * dl / self.avg_doc_len)
        total = 0.0
        for token in query_tokens:
            tf = tf_map.get(token, 0)
            if tf == 0:
                continue
            total += self.idf(token) * tf * (K1 + 1.0) / (tf + norm)
        return total

    def search(self, query: str, k: int) -> list[ScoredChunk]:
        """Top-k chunks by BM25 score; zero-score chunks never appear."""
        if k <= 0:
            return []
        query_tokens = tokenize(query).texts()
        scored: list[tuple[float, str]] = []
        for chunk_id in self._chunk_order:
            s = self.score(query_tokens, chunk_id)
            if s > 0.0:
                scored.append((s, chunk_id))
        scored.sort(key=lambda pair: (-pair[0], pair[1]))
        return [
            ScoredChunk(chunk_id=cid, score=s, rank=i + 1)
            for i, (s, cid) in enumerate(scored[:k])
        ]

    # -- persistence ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "doc_count": self.doc_count,
            "avg_doc_len": self.avg_doc_len,
            "doc_freq": self.doc_freq,
            "term_freq": self.term_freq,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Bm25Index":
        return cls(
            doc_count=int(data["doc_count"]),
            avg_doc_len=float(data["avg_doc_len"]),
            doc_freq={k: int(v) for k, v in data["doc_freq"].items()},
            term_freq={
                cid: {t: int(c) for t, c in tf.items()}
                for cid, tf in data["term_freq"].items()
            },
        )
