"""Tests for the exceptions module."""

import pytest

from quiverforge.exceptions import (
    BoundExceededError,
    ConfigurationError,
    DocumentError,
    PassError,
    PolynomialSyntaxError,
    QuiverError,
    QuiverForgeError,
    RingError,
)


class TestExceptions:
    """Test cases for custom exceptions."""

    def test_quiverforge_error(self) -> None:
        """Test QuiverForgeError creation and attributes."""
        error = QuiverForgeError("Test error message")
        assert str(error) == "Test error message"
        assert error.error_code is None
        assert error.exit_code == 1

        error_with_code = QuiverForgeError("Test error message", "TEST_ERROR")
        assert str(error_with_code) == "Test error message"
        assert error_with_code.error_code == "TEST_ERROR"

    @pytest.mark.parametrize(
        "cls,default_code,exit_code",
        [
            (ConfigurationError, "CONFIG_ERROR", 2),
            (RingError, "RING_ERROR", 3),
            (QuiverError, "QUIVER_ERROR", 4),
            (DocumentError, "DOCUMENT_ERROR", 5),
            (PolynomialSyntaxError, "POLYNOMIAL_SYNTAX_ERROR", 5),
            (BoundExceededError, "BOUND_EXCEEDED", 6),
            (PassError, "PASS_ERROR", 7),
        ],
    )
    def test_subclasses(
        self, cls: type[QuiverForgeError], default_code: str, exit_code: int
    ) -> None:
        """Test default codes, custom codes and exit codes."""
        error = cls("Test error")
        assert isinstance(error, QuiverForgeError)
        assert str(error) == "Test error"
        assert error.error_code == default_code
        assert error.exit_code == exit_code

        error_with_code = cls("Test error", "CUSTOM_ERROR")
        assert error_with_code.error_code == "CUSTOM_ERROR"
