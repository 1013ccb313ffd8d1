"""Restricted script language: a small Python-compatible surface for agent code.

The language is parsed with the stdlib ``ast`` module, validated down to an
explicit statement/expression subset, and run by a tree-walking evaluator with
an operation budget, an import gate, and a working-directory jail.
"""

from .parser import ParseError, ScriptProgram, parse, referenced_imports
from .evaluator import (
    DEFAULT_ALLOWED_IMPORTS,
    DEFAULT_FORBIDDEN_IMPORTS,
    ExecutionError,
    ExecutionResult,
    InterpreterLimits,
    check_imports,
    execute,
    run_source,
)

__all__ = [
    "DEFAULT_ALLOWED_IMPORTS",
    "DEFAULT_FORBIDDEN_IMPORTS",
    "ExecutionError",
    "ExecutionResult",
    "InterpreterLimits",
    "ParseError",
    "ScriptProgram",
    "check_imports",
    "execute",
    "parse",
    "referenced_imports",
    "run_source",
]
