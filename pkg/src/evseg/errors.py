"""Exception hierarchy shared across the package."""


class EvsegError(Exception):
    """Base class for all package errors."""


class CorpusParseError(EvsegError):
    """Raised for malformed corpus files; carries the 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(EvsegError):
    """Raised when parsed data violates a structural invariant."""


class InconsistentAnnotationError(EvsegError):
    """Raised when annotation completion derives a contradiction."""


class ConfigError(EvsegError):
    """Raised for invalid run or training configuration."""


class MissingArtifactError(EvsegError):
    """Raised when a pipeline stage input does not exist."""
