"""Structured errors raised by the engine."""

from __future__ import annotations


class EngineError(Exception):
    """Base class. ``code`` is a stable machine-readable tag."""

    code = "engine-error"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, **self.details}


class DimensionMismatch(EngineError):
    code = "dimension-mismatch"


class NotNegativeDefinite(EngineError):
    code = "not-negative-definite"


class NotContractible(EngineError):
    code = "not-contractible"


class UnknownCurve(EngineError):
    code = "unknown-curve"


class NotLogCanonical(EngineError):
    code = "not-log-canonical"


class StructureViolation(EngineError):
    code = "structure-violation"


class ConfigError(EngineError):
    code = "config-error"


class NotInPolytope(EngineError):
    code = "not-in-polytope"


class ParseError(EngineError):
    """Document-level error; carries the offending line (1-based, if known) and key."""

    code = "parse-error"

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        super().__init__(message, line=line, key=key)
        self.line = line
        self.key = key

    def __str__(self) -> str:
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.key is not None:
            where.append(f"key {self.key!r}")
        return f"{', '.join(where)}: {self.message}" if where else self.message


class InvalidModel(EngineError):
    code = "invalid-model"
