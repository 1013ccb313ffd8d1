"""Answer-file scoring: tolerance checks, record alignment, cell means."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment


def compare_value(predicted, truth, tol):
    """Score one (predicted, truth) cell as 0 or 1. Total: never raises."""

    if tol.kind == "acceptable_set":
        if not isinstance(predicted, str):
            return 0
        accepted = {value.strip().lower() for value in tol.values}
        return 1 if predicted.strip().lower() in accepted else 0

    if tol.kind != "relative_numeric":
        return 0
    # JSON booleans are not measurements, so they mismatch numeric fields
    for value in (predicted, truth):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return 0
        if math.isnan(value):
            return 0
    if truth == 0:
        return 1 if abs(predicted) <= tol.threshold else 0
    return 1 if abs(predicted - truth) <= tol.threshold * abs(truth) else 0


def _solve(matrix):
    rows, cols = linear_sum_assignment(matrix)
    return float(matrix[rows, cols].sum())


def hungarian_assign(cost):
    """Minimal-cost row/col assignment of min(n, m) pairs.

    Among all minimal assignments, returns the one whose sorted pair list
    is lexicographically smallest, so equal-cost alignments are stable.
    """

    matrix = np.asarray(cost, dtype=float)
    if matrix.ndim != 2 or matrix.size == 0:
        raise ValueError("cost must be a non-empty 2d matrix")
    n, m = matrix.shape
    best = _solve(matrix)

    pairs = []
    used_cols = set()
    spent = 0.0
    prev_row = -1
    for position in range(min(n, m)):
        remaining = min(n, m) - position - 1
        chosen = None
        # smallest (row, col) whose prefix still completes at minimal cost
        for r in range(prev_row + 1, n - remaining):
            for c in range(m):
                if c in used_cols:
                    continue
                if remaining:
                    avail_rows = range(r + 1, n)
                    avail_cols = [x for x in range(m) if x not in used_cols and x != c]
                    tail = _solve(matrix[np.ix_(avail_rows, avail_cols)])
                else:
                    tail = 0.0
                total = spent + float(matrix[r, c]) + tail
                if math.isclose(total, best, rel_tol=1e-9, abs_tol=1e-9):
                    chosen = (r, c)
                    break
            if chosen:
                break
        if chosen is None:
            raise RuntimeError("assignment refinement failed to complete")
        pairs.append(chosen)
        spent += float(matrix[chosen])
        prev_row, col = chosen
        used_cols.add(col)
    return pairs


@dataclass(frozen=True)
class QuestionScore:
    question_id: str
    field_scores: dict
    score: float
    produced_valid_file: bool
    failed: bool


def _cell(prediction, field_name, truth, tol):
    if field_name not in prediction:
        return 0
    return compare_value(prediction[field_name], truth.get(field_name), tol)


def evaluate_answer(answer_path, truth_records, spec):
    """Score an answer file against truth records for one question.

    The denominator is always truth-side: every (truth record, compared
    field) cell scores 0 or 1 and the score is the mean over all cells.
    """

    tolerances = spec.columns_to_compare_and_tolerance
    cells = {
        (index, name): 0
        for index in range(len(truth_records))
        for name in tolerances
    }

    def finish(produced):
        score = sum(cells.values()) / len(cells) if produced and cells else 0.0
        return QuestionScore(
            question_id=spec.id,
            field_scores=cells,
            score=score,
            produced_valid_file=produced,
            failed=(score == 0.0 or not produced),
        )

    try:
        data = json.loads(Path(answer_path).read_text())
    except (OSError, ValueError):
        return finish(False)
    if not isinstance(data, list):
        return finish(False)
    # non-dict entries stay in place for alignment but match nothing
    predictions = [entry if isinstance(entry, dict) else {} for entry in data]

    aligned = []
    if spec.id_column is not None:
        by_id = {}
        for prediction in predictions:
            if spec.id_column not in prediction:
                continue
            key = prediction[spec.id_column]
            try:
                if key not in by_id:
                    by_id[key] = prediction
            except TypeError:
                continue
        for index, truth in enumerate(truth_records):
            truth_key = truth.get(spec.id_column)
            try:
                prediction = by_id.get(truth_key)
            except TypeError:
                prediction = None
            if prediction is not None:
                aligned.append((index, prediction))
    elif predictions and truth_records:
        cost = [
            [
                sum(
                    1 - _cell(prediction, name, truth, tol)
                    for name, tol in tolerances.items()
                )
                for prediction in predictions
            ]
            for truth in truth_records
        ]
        for truth_index, prediction_index in hungarian_assign(cost):
            aligned.append((truth_index, predictions[prediction_index]))

    for index, prediction in aligned:
        truth = truth_records[index]
        for name, tol in tolerances.items():
            cells[(index, name)] = _cell(prediction, name, truth, tol)
    return finish(True)
