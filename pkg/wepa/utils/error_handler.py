"""
Error Handling Utilities: Standardized error documents for the CLI.
Every failure surfaces as a timestamped ErrorResponse on stderr.
"""

from pydantic import BaseModel
from datetime import datetime, timezone
from typing import Optional, Any, Dict
import logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")


class WatermarkError(Exception):
    """Base exception for every domain error raised by the package."""
    def __init__(self, message: str, error_code: str = "data_error"):
        self.message = message
        self.error_code = error_code
        self.timestamp = utc_timestamp()
        super().__init__(self.message)


class FileFormatError(WatermarkError):
    """Raised when an input file cannot be parsed into the expected document."""
    def __init__(self, message: str):
        super().__init__(message, "file_format")


class ErrorResponse(BaseModel):
    """Standardized error document."""
    timestamp: str
    error_code: str
    message: str
    details: Optional[Dict[str, Any]] = None


def create_error_response(
    error_code: str,
    message: str,
    details: Optional[Dict[str, Any]] = None
) -> ErrorResponse:
    """
    Create a standardized error response.

    Args:
        error_code: Machine-readable code (e.g. "file_format", "invalid_key")
        message: Human-readable message
        details: Optional additional context

    Returns:
        ErrorResponse object
    """
    return ErrorResponse(
        timestamp=utc_timestamp(),
        error_code=error_code,
        message=message,
        details=details
    )


def error_response_from(exc: Exception) -> ErrorResponse:
    """Build the ErrorResponse for an exception caught at the CLI boundary."""
    if isinstance(exc, WatermarkError):
        return ErrorResponse(
            timestamp=exc.timestamp,
            error_code=exc.error_code,
            message=exc.message,
            details={"type": type(exc).__name__}
        )
    return create_error_response(
        error_code="data_error",
        message=str(exc),
        details={"type": type(exc).__name__}
    )


def log_error(error_code: str, message: str, exception: Optional[Exception] = None):
    """
    Log an error with context.

    Args:
        error_code: Error code
        message: Error message
        exception: Optional exception object for stack trace
    """
    if exception:
        logger.error(f"[{error_code}] {message}", exc_info=exception)
    else:
        logger.error(f"[{error_code}] {message}")
