"""Shared exception types and source diagnostics."""
from __future__ import annotations

from dataclasses import dataclass, field


class DiagridError(Exception):
    """Base class for all errors raised by this package."""


@dataclass(frozen=True)
class Diagnostic:
    """A located message with a stable machine-readable code.

    Lines and columns are 1-based.  ``severity`` is ``"error"`` or
    ``"warning"``; warnings never fail a compile.
    """

    code: str
    message: str
    line: int = 0
    col: int = 0
    severity: str = "error"

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.col}: {self.severity}: {self.code}: {self.message}"


@dataclass
class DiagnosticError(DiagridError):
    """Raised when a compile stage produced error-level diagnostics."""

    diagnostics: list[Diagnostic] = field(default_factory=list)

    def __str__(self) -> str:
        return "; ".join(d.format() for d in self.diagnostics)
