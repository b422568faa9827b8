"""Exception types shared across the package."""


class DectrackError(Exception):
    """Base class for all errors raised by this package."""


class TranscriptParseError(DectrackError):
    """A transcript stream could not be parsed. Carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class EmptyTranscriptError(TranscriptParseError):
    """The transcript stream contained no utterances."""


class ConfigError(DectrackError):
    """A configuration value violates its contract."""


class ContractError(DectrackError):
    """Caller passed arguments that violate an operation's precondition."""


class ImbalanceError(DectrackError):
    """Training data has no positive examples; the detector refuses to train."""


class TransportError(DectrackError):
    """A translation client failed after exhausting retries."""


class SetupError(DectrackError):
    """A backend is missing required registration (e.g. special tokens)."""


class NotFoundError(DectrackError):
    """A requested record does not exist."""


class ConflictError(DectrackError):
    """The operation conflicts with concurrent or prior state."""


class StateError(DectrackError):
    """An illegal job state transition was attempted."""
