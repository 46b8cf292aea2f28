"""Exception types shared across the package."""


class TutorkitError(Exception):
    """Base class for all package errors."""


# --- ingest ---------------------------------------------------------------


class MalformedPdf(TutorkitError):
    """The uploaded bytes are not a parseable PDF."""


class NoTextLayer(TutorkitError):
    """The PDF parsed but contains zero extractable characters."""


class EmptyDocument(TutorkitError):
    """Chunking was asked to run over a document with no characters."""


# --- retrieval ------------------------------------------------------------


class EmptyCorpus(TutorkitError):
    """An index build was requested over zero chunks."""


class IndexNotBuilt(TutorkitError):
    """A search ran against a document that has no index."""


# --- locator --------------------------------------------------------------


class EmptyNeedle(TutorkitError):
    """The reference text to locate has no tokens after normalization."""


# --- llm gateway ----------------------------------------------------------


class GatewayError(TutorkitError):
    """Base class for completion-provider failures."""


class ProviderUnreachable(GatewayError):
    """The provider endpoint could not be reached."""


class ProviderError(GatewayError):
    """The provider answered with an error status."""

    def __init__(self, status: int, body: str):
        super().__init__(f"provider returned {status}: {body}")
        self.status = status
        self.body = body


class Timeout(GatewayError):
    """The provider did not answer within the configured deadline."""


# --- orchestrator ---------------------------------------------------------


class SelectionMissing(TutorkitError):
    """A summarize/explain action arrived without a selection."""


class QueryMissing(TutorkitError):
    """A chat action arrived without a query."""


class NotIndexed(TutorkitError):
    """An answer was requested for a document that was never indexed."""


# --- quiz -----------------------------------------------------------------


class GenerationFailed(TutorkitError):
    """Quiz generation produced no usable cards."""


class UnknownCard(TutorkitError):
    """An answer was recorded for a card id that does not exist."""
