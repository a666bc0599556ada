"""Exceptions raised by ppgen.

Every exception carries a stable ``code`` and the process ``exit_status``
used by the command line front end, which reports them as JSON on stderr.
"""

from typing import Any, Optional


class PpgenError(RuntimeError):
    code = "E_RUNTIME"
    exit_status = 2

    def __init__(self, message: str, details: Optional[Any] = None):
        super().__init__(message)
        self.message = message
        self.details = details

    def as_dict(self) -> dict:
        ret = {"error": self.code, "message": self.message}
        if self.details is not None:
            ret["details"] = self.details
        return ret


class SchemaError(PpgenError):
    """The variable schema or a data file does not match its format."""

    code = "E_SCHEMA"
    exit_status = 1


class DataValidationError(PpgenError):
    """One or more participant records violate the schema."""

    code = "E_DATA"
    exit_status = 1


class ConfigError(PpgenError):
    code = "E_CONFIG"
    exit_status = 1


class DegenerateInputError(PpgenError):
    """Input is well-formed but cannot be processed, e.g. zero normalizers."""

    code = "E_DEGENERATE"
    exit_status = 2


class VerificationError(PpgenError):
    code = "E_VERIFY"
    exit_status = 1
