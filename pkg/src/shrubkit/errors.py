"""Exception hierarchy shared across the package.

Three broad families matter to callers (and to the CLI exit-code mapping):
usage problems, semantic/validation failures, and resource-budget stops.
"""

from __future__ import annotations


class ShrubkitError(Exception):
    """Base class for all package errors."""


class StructuralError(ShrubkitError):
    """Malformed raw data: bad node ids, unreadable files, broken invariants."""


class ValidationError(ShrubkitError):
    """A tree model failed semantic validation; carries the report."""

    def __init__(self, report) -> None:
        super().__init__(str(report))
        self.report = report


class FormulaSyntaxError(ShrubkitError):
    """Formula text failed to parse; carries source position."""

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class UnboundVariableError(ShrubkitError):
    """A formula used a variable outside any binder."""

    def __init__(self, name: str) -> None:
        super().__init__(f"unbound variable {name!r}")
        self.name = name


class ResourceLimitError(ShrubkitError):
    """A computation exceeded its configured size or work budget."""


class UsageError(ShrubkitError):
    """The command line was malformed."""


class KernelVerificationError(ShrubkitError):
    """A shrink result failed its equivalence check."""
