"""Question suites, answer scoring, and result aggregation."""

from .questions import (
    CATEGORIES,
    MissingPlaceholderTarget,
    QuestionSpec,
    SchemaError,
    Tolerance,
    load_question,
    load_suite,
    materialize_prompt,
    parse_tolerance,
)
from .report import CategoryStats, InconsistentTrials, RunReport, aggregate, write_report
from .scoring import QuestionScore, compare_value, evaluate_answer, hungarian_assign

__all__ = [
    "CATEGORIES",
    "CategoryStats",
    "InconsistentTrials",
    "MissingPlaceholderTarget",
    "QuestionScore",
    "QuestionSpec",
    "RunReport",
    "SchemaError",
    "Tolerance",
    "aggregate",
    "compare_value",
    "evaluate_answer",
    "hungarian_assign",
    "load_question",
    "load_suite",
    "materialize_prompt",
    "parse_tolerance",
    "write_report",
]
