"""Exception types shared across the package."""

from __future__ import annotations


class PccrsError(Exception):
    """Base class for all package errors."""


class TransportError(PccrsError):
    """Live backend could not reach the endpoint after exhausting retries."""


class AuthError(PccrsError):
    """Credentials missing or rejected by the provider."""


class ScriptExhaustedError(PccrsError):
    """Scripted backend has no queued response left for a call site."""


class NoJsonObjectError(PccrsError):
    """Completion text contains no brace-delimited object."""


class JsonParseError(PccrsError):
    """A brace-delimited candidate was found but none parsed as JSON."""


class ContractViolationError(PccrsError):
    """Structured completion failed after all repair attempts.

    Carries every raw response text seen during the attempts so callers can
    log or inspect what the model actually said.
    """

    def __init__(self, message: str, responses: list[str] | None = None):
        super().__init__(message)
        self.responses: list[str] = list(responses or [])


class EmptyGenerationError(PccrsError):
    """Completion text was blank after all repair attempts."""


class UnknownStrategyError(PccrsError):
    """Selector output contained no name matching the six strategy cards."""


class InvalidBooleanError(PccrsError):
    """Critic verdict was not a recognizable True/False value."""


class CatalogIoError(PccrsError):
    """Catalog file could not be read."""


class EmptyCatalogError(PccrsError):
    """Catalog holds zero valid items."""


class EmbedderError(PccrsError):
    """External embedding service unreachable or returned a bad payload."""


class UnresolvableTitleError(PccrsError):
    """No candidate title matched the recommendation mention."""


class AmbiguousTitleError(PccrsError):
    """Two distinct candidate titles matched the mention at equal length."""


class NoCurrentItemError(PccrsError):
    """An explanation turn was requested before any recommendation."""


class OutOfRangeScoreError(PccrsError):
    """Judge returned a score outside the 1..5 rubric range."""


class InsufficientBandDataError(PccrsError):
    """Relevance-gap analysis needs at least one low and one high band sample."""


class NoRecommendationTurnError(PccrsError):
    """Recall requested for a dialogue that never issued a recommendation."""
