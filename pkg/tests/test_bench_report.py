import json
import math
import random
import statistics

import pytest

from histoagent.bench import (
    InconsistentTrials,
    QuestionScore,
    aggregate,
    write_report,
)
from histoagent.bench.report import weighted_overall

# published category means with question counts (25, 25, 25, 15); the
# rightmost column of each table is the count-weighted average
COUNTS = (25, 25, 25, 15)

SCORE_ROWS = {
    "llm_only": ((0.000, 0.000, 0.000, 0.000), 0.000),
    "plain_interpreter": ((0.377, 0.058, 0.039, 0.133), 0.154),
    "interpreter_with_retries": ((0.443, 0.152, 0.217, 0.259), 0.269),
    "full_agent": ((0.777, 0.323, 0.335, 0.472), 0.477),
}

FAILURE_ROWS = {
    "llm_only": ((1.000, 1.000, 1.000, 1.000), 1.000),
    "plain_interpreter": ((0.580, 0.773, 0.947, 0.867), 0.783),
    "interpreter_with_retries": ((0.507, 0.627, 0.613, 0.667), 0.596),
    "full_agent": ((0.200, 0.320, 0.413, 0.422), 0.330),
}


def make_score(qid, value, produced=True):
    return QuestionScore(
        question_id=qid,
        field_scores={},
        score=value,
        produced_valid_file=produced,
        failed=(value == 0.0 or not produced),
    )


def uniform_trials(category_means, trials=3):
    """Three identical trials where every question scores its category mean."""

    categories = {}
    per_trial = {}
    labels = ("DataQA", "CellularQA", "PatchQA", "SlideQA")
    for label, count, mean in zip(labels, COUNTS, category_means):
        for i in range(count):
            qid = f"{label}_{i:02d}"
            categories[qid] = label
            per_trial[qid] = make_score(qid, mean)
    return [dict(per_trial) for _ in range(trials)], categories


class TestPublishedAverages:
    @pytest.mark.parametrize("row", sorted(SCORE_ROWS))
    def test_score_rows(self, row):
        means, published = SCORE_ROWS[row]
        assert abs(weighted_overall(means, COUNTS) - published) <= 0.0005 + 1e-12

    @pytest.mark.parametrize("row", sorted(FAILURE_ROWS))
    def test_failure_rows(self, row):
        means, published = FAILURE_ROWS[row]
        assert abs(weighted_overall(means, COUNTS) - published) <= 0.0005 + 1e-12

    @pytest.mark.parametrize("row", sorted(SCORE_ROWS))
    def test_full_aggregation_path_reproduces_rows(self, row):
        means, published = SCORE_ROWS[row]
        trials, categories = uniform_trials(means)
        report = aggregate(trials, categories)
        for label, mean in zip(("DataQA", "CellularQA", "PatchQA", "SlideQA"), means):
            assert report.categories[label].score_mean == pytest.approx(mean)
            assert report.categories[label].score_sem == 0.0
        assert abs(report.overall_score - published) <= 0.0005 + 1e-12


class TestAggregate:
    def test_sem_over_trial_means(self):
        categories = {"q": "DataQA"}
        trials = [
            {"q": make_score("q", 0.2)},
            {"q": make_score("q", 0.4)},
            {"q": make_score("q", 0.6)},
        ]
        report = aggregate(trials, categories)
        stats = report.categories["DataQA"]
        assert stats.score_mean == pytest.approx(0.4)
        expected = statistics.pstdev([0.2, 0.4, 0.6]) / math.sqrt(3)
        assert stats.score_sem == pytest.approx(expected)

    def test_single_trial_sem_is_zero(self):
        report = aggregate([{"q": make_score("q", 0.7)}], {"q": "PatchQA"})
        assert report.categories["PatchQA"].score_sem == 0.0
        assert report.trials == 1

    def test_failure_rate_counts_failed_flags(self):
        categories = {"a": "DataQA", "b": "DataQA"}
        trials = [
            {"a": make_score("a", 0.0), "b": make_score("b", 1.0)},
            {"a": make_score("a", 0.5), "b": make_score("b", 0.0, produced=False)},
        ]
        report = aggregate(trials, categories)
        assert report.categories["DataQA"].failure_rate == pytest.approx(0.5)

    def test_inconsistent_trials_rejected(self):
        trials = [{"a": make_score("a", 1.0)}, {"b": make_score("b", 1.0)}]
        with pytest.raises(InconsistentTrials):
            aggregate(trials, {"a": "DataQA", "b": "DataQA"})

    def test_no_trials_rejected(self):
        with pytest.raises(InconsistentTrials):
            aggregate([], {})

    def test_missing_category_rejected(self):
        with pytest.raises(ValueError, match="no category"):
            aggregate([{"q": make_score("q", 1.0)}], {})

    def test_overall_equals_question_level_mean(self):
        # weighting algebra: category-weighted overall == flat question mean
        rng = random.Random(1834)
        categories = {}
        trials = [dict() for _ in range(3)]
        for i in range(40):
            qid = f"q{i:02d}"
            categories[qid] = ("DataQA", "CellularQA", "PatchQA", "SlideQA")[i % 4]
            for trial in trials:
                trial[qid] = make_score(qid, rng.random())
        report = aggregate(trials, categories)
        flat = statistics.fmean(
            statistics.fmean(t[q].score for q in categories) for t in trials
        )
        assert abs(report.overall_score - flat) < 1e-12

    def test_category_order_in_report(self):
        categories = {"s": "SlideQA", "d": "DataQA", "p": "PatchQA"}
        trials = [{q: make_score(q, 0.5) for q in categories}]
        report = aggregate(trials, categories)
        assert list(report.categories) == ["DataQA", "PatchQA", "SlideQA"]

    def test_question_scores_recorded_per_trial(self):
        trials = [
            {"q": make_score("q", 0.25)},
            {"q": make_score("q", 0.75)},
        ]
        report = aggregate(trials, {"q": "SlideQA"})
        assert report.questions["q"]["scores"] == [0.25, 0.75]
        assert report.questions["q"]["failed"] == [False, False]
        assert report.questions["q"]["category"] == "SlideQA"


class TestWriteReport:
    def test_round_trip_and_determinism(self, tmp_path):
        trials, categories = uniform_trials((0.5, 0.25, 0.75, 1.0), trials=2)
        report = aggregate(trials, categories)
        first = write_report(report, tmp_path / "a.json").read_bytes()
        second = write_report(report, tmp_path / "b.json").read_bytes()
        assert first == second
        loaded = json.loads(first)
        assert loaded["trials"] == 2
        assert loaded["overall"]["score"] == pytest.approx(report.overall_score)
        assert set(loaded["categories"]) == {
            "DataQA",
            "CellularQA",
            "PatchQA",
            "SlideQA",
        }

    def test_weighted_overall_validations(self):
        with pytest.raises(ValueError):
            weighted_overall([0.5], [1, 2])
        with pytest.raises(ValueError):
            weighted_overall([], [])
        with pytest.raises(ValueError):
            weighted_overall([0.5], [0])
