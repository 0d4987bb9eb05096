"""
Exception hierarchy shared by every deepcond module.

Each error carries a stable `classification` code (serialized into the CLI
failure JSON) and an optional `details` dict with diagnostics.

Public API:
- DeepCondError and subclasses
- classify(exc) -> dict
"""
from __future__ import annotations

from typing import Any, Dict, Optional

# Classification codes
DOMAIN_ERROR = "domain_error"
NUMERICAL_ERROR = "numerical_error"
RESOURCE_ERROR = "resource_error"
PRECONDITION_ERROR = "precondition_error"
DEGENERATE_INPUT = "degenerate_input"
CONFIGURATION_ERROR = "configuration_error"
USAGE_ERROR = "usage_error"
PARSE_ERROR = "parse_error"


class DeepCondError(Exception):
    classification = "error"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = dict(details or {})


class DomainError(DeepCondError, ValueError):
    """Argument outside the mathematical domain of an operation."""
    classification = DOMAIN_ERROR


class NumericalError(DeepCondError, ArithmeticError):
    classification = NUMERICAL_ERROR


class ResourceError(DeepCondError, MemoryError):
    classification = RESOURCE_ERROR


class PreconditionError(DeepCondError, ValueError):
    """A theorem hypothesis does not hold for the given inputs."""
    classification = PRECONDITION_ERROR


class DegenerateInputError(DeepCondError, ValueError):
    classification = DEGENERATE_INPUT


class ConfigurationError(DeepCondError, ValueError):
    classification = CONFIGURATION_ERROR


class UsageError(DeepCondError, ValueError):
    classification = USAGE_ERROR


class ParseError(DeepCondError, ValueError):
    classification = PARSE_ERROR

    def __init__(self, message: str, line: int, details: Optional[Dict[str, Any]] = None):
        merged = dict(details or {})
        merged["line"] = line
        super().__init__(f"line {line}: {message}", merged)
        self.line = line


def classify(exc: BaseException) -> Dict[str, Any]:
    """Machine-readable failure payload for an exception."""
    if isinstance(exc, DeepCondError):
        return {
            "ok": False,
            "classification": exc.classification,
            "message": exc.message,
            "details": exc.details,
        }
    return {
        "ok": False,
        "classification": "internal_error",
        "message": f"{type(exc).__name__}: {exc}",
        "details": {},
    }
