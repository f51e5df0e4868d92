"""Diagnostics with source locations, rendered as file:line:col-col."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Loc:
    """A source span on a single line. Columns are 1-based and inclusive."""

    file: str
    line: int
    col: int
    end_col: int

    def render(self) -> str:
        return f"{self.file}:{self.line}:{self.col}-{self.end_col}"


NO_LOC = Loc("<builtin>", 0, 1, 1)


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    message: str
    loc: Loc

    def render(self) -> str:
        return f"{self.loc.render()}: {self.severity.value}: {self.message}"


def error(message: str, loc: Loc) -> Diagnostic:
    return Diagnostic(Severity.ERROR, message, loc)
