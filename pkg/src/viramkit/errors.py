"""Exception types shared across the toolkit."""

from __future__ import annotations


class ViramkitError(Exception):
    """Base class for all toolkit errors."""


class BenchmarkFormatError(ViramkitError):
    """A benchmark file could not be parsed (bad header, missing field, bad row)."""


class ValidationError(ViramkitError):
    """Data violated an invariant (inconsistent instance, misaligned corpus, ...)."""


class EmptyInputError(ViramkitError):
    """An operation received empty text where non-empty text is required."""


class ModelFormatError(ViramkitError):
    """A restorer model file is unreadable or has an unsupported format version."""


class BackendUnavailableError(ViramkitError):
    """A backend could not be reached after all retry attempts."""


class ProtocolError(ViramkitError):
    """A backend answered, but outside the wire contract (bad status, shape, or length)."""


class ReplyParseError(ViramkitError):
    """An LLM reply did not contain the expected labeled sections."""

    def __init__(self, message: str, raw: str = "") -> None:
        super().__init__(message)
        self.raw = raw


class ReportColumnError(ViramkitError):
    """A metric-report column could not be computed; names the failing column."""
