"""Trial aggregation and report.json emission."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from statistics import fmean, pstdev

from .questions import CATEGORIES


class InconsistentTrials(ValueError):
    """Trials cover different question sets."""


@dataclass(frozen=True)
class CategoryStats:
    n_questions: int
    score_mean: float
    score_sem: float
    failure_rate: float
    failure_rate_sem: float


@dataclass(frozen=True)
class RunReport:
    trials: int
    categories: dict
    overall_score: float
    overall_failure_rate: float
    questions: dict

    def to_json_dict(self):
        return {
            "trials": self.trials,
            "categories": {
                name: {
                    "n_questions": stats.n_questions,
                    "score_mean": stats.score_mean,
                    "score_sem": stats.score_sem,
                    "failure_rate": stats.failure_rate,
                    "failure_rate_sem": stats.failure_rate_sem,
                }
                for name, stats in self.categories.items()
            },
            "overall": {
                "score": self.overall_score,
                "failure_rate": self.overall_failure_rate,
            },
            "questions": self.questions,
        }


def weighted_overall(category_values, category_counts):
    """Overall metric as the question-count weighted mean of category values."""

    if len(category_values) != len(category_counts) or not category_values:
        raise ValueError("need one count per category value")
    total = sum(category_counts)
    if total <= 0:
        raise ValueError("question counts must sum to a positive number")
    return sum(v * n for v, n in zip(category_values, category_counts)) / total


def _sem(trial_values):
    # trial means are the population; lone trials report 0 spread
    return pstdev(trial_values) / math.sqrt(len(trial_values))


def aggregate(trial_scores, categories):
    """Fold per-trial QuestionScore maps into a RunReport.

    trial_scores is a sequence over trials of {question_id: QuestionScore};
    categories maps question_id to its category name.
    """

    if not trial_scores:
        raise InconsistentTrials("need at least one trial")
    ids = sorted(trial_scores[0])
    for number, trial in enumerate(trial_scores):
        if sorted(trial) != ids:
            raise InconsistentTrials(
                f"trial {number} covers {sorted(trial)}, expected {ids}"
            )
    for qid in ids:
        if qid not in categories:
            raise ValueError(f"question '{qid}' has no category")

    present = [c for c in CATEGORIES if c in set(categories[q] for q in ids)]
    stats = {}
    for category in present:
        members = [q for q in ids if categories[q] == category]
        score_by_trial = [fmean(t[q].score for q in members) for t in trial_scores]
        fail_by_trial = [
            fmean(1.0 if t[q].failed else 0.0 for q in members) for t in trial_scores
        ]
        stats[category] = CategoryStats(
            n_questions=len(members),
            score_mean=fmean(score_by_trial),
            score_sem=_sem(score_by_trial),
            failure_rate=fmean(fail_by_trial),
            failure_rate_sem=_sem(fail_by_trial),
        )

    counts = [stats[c].n_questions for c in present]
    questions = {
        qid: {
            "category": categories[qid],
            "scores": [trial[qid].score for trial in trial_scores],
            "failed": [trial[qid].failed for trial in trial_scores],
        }
        for qid in ids
    }
    return RunReport(
        trials=len(trial_scores),
        categories=stats,
        overall_score=weighted_overall([stats[c].score_mean for c in present], counts),
        overall_failure_rate=weighted_overall(
            [stats[c].failure_rate for c in present], counts
        ),
        questions=questions,
    )


def write_report(report, path):
    path = Path(path)
    path.write_text(json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n")
    return path
