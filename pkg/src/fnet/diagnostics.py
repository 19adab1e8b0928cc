"""Coded findings produced by the parser, resolver, linter and view checker."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


# Code -> (default severity, short title). Codes are a stable external interface.
CATALOG: dict[str, tuple[Severity, str]] = {
    "P001": (Severity.ERROR, "syntax error"),
    "N001": (Severity.ERROR, "duplicate name"),
    "N002": (Severity.ERROR, "type error"),
    "N003": (Severity.ERROR, "recursive type instantiation"),
    "N004": (Severity.ERROR, "unresolved connector endpoint"),
    "N005": (Severity.ERROR, "conflicting signal declaration"),
    "N006": (Severity.ERROR, "unknown signal"),
    "W001": (Severity.WARNING, "connector without signals"),
    "W002": (Severity.WARNING, "connector against port direction"),
    "W003": (Severity.WARNING, "isolated block"),
    "W004": (Severity.WARNING, "duplicate connector"),
    "V001": (Severity.ERROR, "unresolved view block"),
    "V002": (Severity.ERROR, "ambiguous view block"),
    "V003": (Severity.ERROR, "hierarchy not present in architecture"),
    "V004": (Severity.ERROR, "communication not present in architecture"),
    "V005": (Severity.ERROR, "signal not present in architecture"),
    "V006": (Severity.ERROR, "architecture communication carries no signal"),
}

# Warnings that --strict turns into errors.
STRICT_UPGRADES = frozenset({"W001", "W002"})


@dataclass(frozen=True, order=True)
class Span:
    """A source location. ``start``/``end`` are character offsets into the source text."""

    file: str
    line: int
    col: int
    start: int = field(default=0, compare=False)
    end: int = field(default=0, compare=False)

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


NO_SPAN = Span("<unknown>", 0, 0)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: Severity
    span: Span
    message: str
    related: tuple[str, ...] = ()

    @property
    def sort_key(self) -> tuple[str, int, int, str, str]:
        return (self.span.file, self.span.line, self.span.col, self.code, self.message)

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def format(self) -> str:
        return f"{self.span}: {self.severity.value}[{self.code}]: {self.message}"

    def to_dict(self) -> dict[str, object]:
        return {
            "code": self.code,
            "severity": self.severity.value,
            "span": {"file": self.span.file, "line": self.span.line, "col": self.span.col},
            "message": self.message,
            "related": list(self.related),
        }


def make(code: str, span: Span, message: str, related: Iterable[str] = ()) -> Diagnostic:
    """Build a diagnostic with the catalog's default severity for ``code``."""
    severity, _ = CATALOG[code]
    return Diagnostic(code, severity, span, message, tuple(related))


def apply_strict(diagnostics: Iterable[Diagnostic]) -> list[Diagnostic]:
    return [
        replace(d, severity=Severity.ERROR) if d.code in STRICT_UPGRADES else d
        for d in diagnostics
    ]


def sort_diagnostics(diagnostics: Iterable[Diagnostic]) -> list[Diagnostic]:
    return sorted(diagnostics, key=lambda d: d.sort_key)


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)
