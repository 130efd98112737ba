"""Diagnostics shared by every stage."""
from __future__ import annotations

from typing import Optional


class PerplError(Exception):
    """A user-facing diagnostic with an optional source position."""

    stage = "error"

    def __init__(self, message: str, pos: Optional[tuple[int, int]] = None):
        super().__init__(message)
        self.message = message
        self.pos = pos

    def render(self, filename: str = "<input>") -> str:
        line, col = self.pos if self.pos else (1, 1)
        return f"{filename}:{line}:{col}: error: {self.message}"

    def to_json(self, filename: str = "<input>") -> dict:
        line, col = self.pos if self.pos else (1, 1)
        return {"file": filename, "line": line, "col": col, "stage": self.stage,
                "severity": "error", "message": self.message}


class ParseError(PerplError):
    stage = "parse"


class DesugarError(PerplError):
    stage = "desugar"


class TypeError_(PerplError):
    stage = "typecheck"


class TransformError(PerplError):
    stage = "transform"


class NoDRSequence(TransformError):
    """Raised when no recursive type can be eliminated."""

    def __init__(self, message: str, graph=None):
        super().__init__(message)
        self.graph = graph


class CompileError(PerplError):
    stage = "semantics"


class BudgetExceeded(CompileError):
    """The equation system would need more variables than allowed."""
