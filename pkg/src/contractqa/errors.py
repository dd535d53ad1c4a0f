"""Exception types shared across the package."""


class ContractQaError(Exception):
    """Base class for all errors raised by this package."""


class EmptyDocument(ContractQaError):
    """Raised when a document is blank after whitespace trimming."""


class EmptyText(ContractQaError):
    """Raised when an empty string is passed to an embedding provider."""


class ProviderUnavailable(ContractQaError):
    """Remote embedding provider could not be reached after retries."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class LlmUnavailable(ContractQaError):
    """Chat provider failed after bounded retries."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class UnmatchedPrompt(ContractQaError):
    """Scripted chat provider received a prompt its next matcher rejects."""


class LlmRefusal(ContractQaError):
    """The model response contained no extractable SQL statement."""


class DimensionMismatch(ContractQaError):
    """Vector dimension differs from the index's configured dimension."""


class ConnectionFailed(ContractQaError):
    """Database file missing or unreadable."""


class SqlExecutionError(ContractQaError):
    """Execution of a validated statement failed; carries the db message."""


class QueryTimeout(ContractQaError):
    """Read-only query exceeded its time budget."""


class ValidationFailed(ContractQaError):
    """Generated SQL was rejected by the safety validator."""

    def __init__(self, verdict):
        super().__init__(f"sql rejected: {verdict.violation}")
        self.verdict = verdict


class ContextOverflow(ContractQaError):
    """The question alone exceeds the prompt context budget."""


class EngineUnreachable(ContractQaError):
    """Benchmark runner could not reach a working engine."""
