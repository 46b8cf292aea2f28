"""tutorkit: a self-hostable intelligent-textbook backend.

Students upload course PDFs, chat with the text through a grounded retrieval
pipeline, get one-click summaries or simpler explanations of highlighted
passages, see the answer's source passages highlighted in-context, and drill
quiz cards scheduled by a Leitner-box engine.
"""

__version__ = "0.1.0"

from .config import Settings
from .ingest import Chunk, DocSpan, ExtractedDocument, PageText, chunk, extract
from .index import Bm25Index, ScoredChunk, tokenize
from .locate import HighlightSpan, LocateResult, locate, normalize
from .llm import ChatMessage, CompletionRequest, MockLlmGateway, count_tokens
from .orchestrator import AgentAction, Answer, LearnerProfile, Orchestrator, Reference
from .quiz import QuizCard, QuizConfig, QuizEngine, SectionQuizState

__all__ = [
    "Settings",
    "Chunk",
    "DocSpan",
    "ExtractedDocument",
    "PageText",
    "chunk",
    "extract",
    "Bm25Index",
    "ScoredChunk",
    "tokenize",
    "HighlightSpan",
    "LocateResult",
    "locate",
    "normalize",
    "ChatMessage",
    "CompletionRequest",
    "MockLlmGateway",
    "count_tokens",
    "AgentAction",
    "Answer",
    "LearnerProfile",
    "Orchestrator",
    "Reference",
    "QuizCard",
    "QuizConfig",
    "QuizEngine",
    "SectionQuizState",
]
