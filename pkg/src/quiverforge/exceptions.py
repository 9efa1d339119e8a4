"""Custom exception types for the quiverforge library and CLI."""


class QuiverForgeError(Exception):
    """Base exception for all application-specific errors."""

    exit_code: int = 1

    def __init__(self, message: str, error_code: str | None = None):
        super().__init__(message)
        self.error_code = error_code


class ConfigurationError(QuiverForgeError):
    """Raised for configuration-related errors."""

    exit_code = 2

    def __init__(self, message: str, error_code: str = "CONFIG_ERROR"):
        super().__init__(message, error_code)


class RingError(QuiverForgeError):
    """Raised for base-ring failures: bad fields, ring mismatches, subfield violations."""

    exit_code = 3

    def __init__(self, message: str, error_code: str = "RING_ERROR"):
        super().__init__(message, error_code)


class QuiverError(QuiverForgeError):
    """Raised when a full quiver is malformed or an operation's precondition fails."""

    exit_code = 4

    def __init__(self, message: str, error_code: str = "QUIVER_ERROR"):
        super().__init__(message, error_code)


class DocumentError(QuiverForgeError):
    """Raised for malformed quiver documents, with the offending location in the message."""

    exit_code = 5

    def __init__(self, message: str, error_code: str = "DOCUMENT_ERROR"):
        super().__init__(message, error_code)


class PolynomialSyntaxError(QuiverForgeError):
    """Raised when a relation or identity string cannot be parsed."""

    exit_code = 5

    def __init__(self, message: str, error_code: str = "POLYNOMIAL_SYNTAX_ERROR"):
        super().__init__(message, error_code)


class BoundExceededError(QuiverForgeError):
    """Raised when a configured size bound would be exceeded."""

    exit_code = 6

    def __init__(self, message: str, error_code: str = "BOUND_EXCEEDED"):
        super().__init__(message, error_code)


class PassError(QuiverForgeError):
    """Raised when a transformation pass refuses its input."""

    exit_code = 7

    def __init__(self, message: str, error_code: str = "PASS_ERROR"):
        super().__init__(message, error_code)
