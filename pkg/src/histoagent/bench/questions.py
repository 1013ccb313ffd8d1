"""Question loading, validation, and prompt materialization."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

CATEGORIES = ("DataQA", "CellularQA", "PatchQA", "SlideQA")

DATA_TYPES = ("single_wsi", "multiple_wsi", "summary_of_multiple_wsi")

# the only substitution targets a question file may use
PLACEHOLDERS = ("path_to_slide", "path_to_dataset", "path_to_metadata", "working_dir")

_PLACEHOLDER_RE = re.compile(r"\{([a-z_][a-z0-9_]*)\}")

_REQUIRED_FIELDS = (
    "id",
    "data_type",
    "question",
    "additional_instructions",
    "output_instructions",
    "columns_to_compare_and_tolerance",
    "rationale",
    "is_pathologist_verified",
    "is_biomedical_scientist_verified",
)

_OPTIONAL_FIELDS = (
    "slide_relative_path",
    "dataset_relative_path",
    "path_to_metadata",
    "id_column",
    "category",
)


class SchemaError(ValueError):
    """A question file violates the schema; the message names the field."""


class MissingPlaceholderTarget(ValueError):
    """A prompt placeholder has no value to substitute."""


@dataclass(frozen=True)
class Tolerance:
    """How one compared field is judged.

    kind is either "relative_numeric" (threshold is a fraction of the
    truth magnitude) or "acceptable_set" (case-insensitive membership).
    """

    kind: str
    threshold: float = 0.0
    values: frozenset = frozenset()

    @classmethod
    def relative_numeric(cls, threshold):
        return cls(kind="relative_numeric", threshold=float(threshold))

    @classmethod
    def acceptable_set(cls, values):
        return cls(kind="acceptable_set", values=frozenset(values))


def parse_tolerance(field_name, raw):
    """A bare number is a relative threshold, a list is an acceptable set."""

    if isinstance(raw, bool):
        raise SchemaError(f"tolerance for '{field_name}' must be a number or list of strings")
    if isinstance(raw, (int, float)):
        if raw <= 0:
            raise SchemaError(f"tolerance for '{field_name}' must be positive, got {raw}")
        return Tolerance.relative_numeric(raw)
    if isinstance(raw, list):
        if not raw:
            raise SchemaError(f"acceptable set for '{field_name}' must be non-empty")
        for value in raw:
            if not isinstance(value, str):
                raise SchemaError(
                    f"acceptable set for '{field_name}' must contain only strings"
                )
        return Tolerance.acceptable_set(raw)
    raise SchemaError(f"tolerance for '{field_name}' must be a number or list of strings")


@dataclass(frozen=True)
class QuestionSpec:
    id: str
    data_type: str
    question: str
    additional_instructions: str
    output_instructions: str
    rationale: str
    is_pathologist_verified: bool
    is_biomedical_scientist_verified: bool
    columns_to_compare_and_tolerance: dict = field(default_factory=dict)
    slide_relative_path: str | None = None
    dataset_relative_path: str | None = None
    path_to_metadata: str | None = None
    id_column: str | None = None
    category: str | None = None

    def placeholders_used(self):
        text = "\n".join(
            (self.question, self.additional_instructions, self.output_instructions)
        )
        found = []
        for match in _PLACEHOLDER_RE.finditer(text):
            if match.group(1) not in found:
                found.append(match.group(1))
        return found


def _require(raw, name, kind, path):
    if name not in raw:
        raise SchemaError(f"{path}: missing required field '{name}'")
    value = raw[name]
    if kind is bool:
        if not isinstance(value, bool):
            raise SchemaError(f"{path}: field '{name}' must be a boolean")
    elif not isinstance(value, kind) or isinstance(value, bool):
        raise SchemaError(f"{path}: field '{name}' must be a {kind.__name__}")
    return value


def load_question(path, category=None):
    """Parse and validate one question file.

    category, when not given, is inferred from the parent directory name
    if that name is a known category.
    """

    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, ValueError) as exc:
        raise SchemaError(f"{path}: unreadable question file: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: question file must be a JSON object")

    known = set(_REQUIRED_FIELDS) | set(_OPTIONAL_FIELDS)
    for name in raw:
        if name not in known:
            raise SchemaError(f"{path}: unknown field '{name}'")

    qid = _require(raw, "id", str, path)
    data_type = _require(raw, "data_type", str, path)
    if data_type not in DATA_TYPES:
        raise SchemaError(f"{path}: field 'data_type' must be one of {DATA_TYPES}")

    slide = raw.get("slide_relative_path")
    dataset = raw.get("dataset_relative_path")
    if slide is None and dataset is None:
        raise SchemaError(
            f"{path}: need 'slide_relative_path' or 'dataset_relative_path'"
        )
    for name in ("slide_relative_path", "dataset_relative_path", "path_to_metadata"):
        if name in raw and not isinstance(raw[name], str):
            raise SchemaError(f"{path}: field '{name}' must be a str")

    id_column = raw.get("id_column")
    if id_column is not None and not isinstance(id_column, str):
        raise SchemaError(f"{path}: field 'id_column' must be a string or null")

    tolerances_raw = _require(raw, "columns_to_compare_and_tolerance", dict, path)
    if not tolerances_raw:
        raise SchemaError(
            f"{path}: field 'columns_to_compare_and_tolerance' must be non-empty"
        )
    tolerances = {
        name: parse_tolerance(name, value) for name, value in tolerances_raw.items()
    }

    if category is None:
        category = raw.get("category")
    if category is None and path.parent.name in CATEGORIES:
        category = path.parent.name
    if category is not None and category not in CATEGORIES:
        raise SchemaError(f"{path}: field 'category' must be one of {CATEGORIES}")

    spec = QuestionSpec(
        id=qid,
        data_type=data_type,
        question=_require(raw, "question", str, path),
        additional_instructions=_require(raw, "additional_instructions", str, path),
        output_instructions=_require(raw, "output_instructions", str, path),
        rationale=_require(raw, "rationale", str, path),
        is_pathologist_verified=_require(raw, "is_pathologist_verified", bool, path),
        is_biomedical_scientist_verified=_require(
            raw, "is_biomedical_scientist_verified", bool, path
        ),
        columns_to_compare_and_tolerance=tolerances,
        slide_relative_path=slide,
        dataset_relative_path=dataset,
        path_to_metadata=raw.get("path_to_metadata"),
        id_column=id_column,
        category=category,
    )
    for name in spec.placeholders_used():
        if name not in PLACEHOLDERS:
            raise SchemaError(f"{path}: unknown placeholder '{{{name}}}'")
    return spec


def load_suite(suite_dir):
    """Load every *.json under suite_dir, sorted by path for stable order.

    Question ids must be unique across the whole suite.  A subdirectory
    named "truth" is reserved for ground truth files and is not scanned.
    """

    suite_dir = Path(suite_dir)
    if not suite_dir.is_dir():
        raise SchemaError(f"suite directory {suite_dir} does not exist")
    specs = []
    seen = {}
    for path in sorted(suite_dir.rglob("*.json")):
        if "truth" in path.relative_to(suite_dir).parts[:-1]:
            continue
        spec = load_question(path)
        if spec.id in seen:
            raise SchemaError(
                f"{path}: duplicate question id '{spec.id}' (also in {seen[spec.id]})"
            )
        seen[spec.id] = path
        specs.append(spec)
    if not specs:
        raise SchemaError(f"suite directory {suite_dir} contains no question files")
    return specs


def materialize_prompt(spec, dataset_root, working_dir):
    """Substitute placeholders with absolute paths and join the prompt parts.

    Substitution is plain string replacement; literal braces elsewhere in
    the text (JSON examples in output_instructions) are left alone.
    """

    dataset_root = Path(dataset_root).resolve()
    values = {"working_dir": str(Path(working_dir).resolve())}
    if spec.slide_relative_path is not None:
        values["path_to_slide"] = str(dataset_root / spec.slide_relative_path)
    if spec.dataset_relative_path is not None:
        values["path_to_dataset"] = str(dataset_root / spec.dataset_relative_path)
    if spec.path_to_metadata is not None:
        values["path_to_metadata"] = str(dataset_root / spec.path_to_metadata)

    text = "\n\n".join(
        part
        for part in (
            spec.question.strip(),
            spec.additional_instructions.strip(),
            spec.output_instructions.strip(),
        )
        if part
    )
    for name in spec.placeholders_used():
        if name not in values:
            raise MissingPlaceholderTarget(
                f"question {spec.id} uses {{{name}}} but the spec provides no value for it"
            )
        text = text.replace("{" + name + "}", values[name])

    leftover = [
        m.group(1) for m in _PLACEHOLDER_RE.finditer(text) if m.group(1) in PLACEHOLDERS
    ]
    if leftover:
        raise MissingPlaceholderTarget(
            f"question {spec.id} left placeholders unresolved: {leftover}"
        )
    return text
