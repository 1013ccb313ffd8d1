"""Exception types shared between the evaluator, shims, and tool bridges."""

from __future__ import annotations


class ScriptFault(Exception):
    """Recoverable runtime fault inside a script (the only catchable kind)."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line


class SandboxEscape(Exception):
    """Attempted access outside the working directory jail."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line


class ImportViolation(Exception):
    """Import gate refusal; kind is ForbiddenImport or UnknownImport."""

    def __init__(self, kind: str, module: str, line: int | None = None):
        self.kind = kind
        self.module = module
        self.line = line
        if kind == "ForbiddenImport":
            self.message = f"import of '{module}' is forbidden"
        else:
            self.message = f"module '{module}' is not available"
        super().__init__(self.message)


class OperationsExhausted(Exception):
    """Internal signal: the operation budget ran out."""

    def __init__(self, line: int | None = None):
        super().__init__("operation budget exhausted")
        self.line = line


class WallClockExhausted(Exception):
    """Internal signal: the wall clock budget ran out."""

    def __init__(self, line: int | None = None):
        super().__init__("wall clock budget exhausted")
        self.line = line
