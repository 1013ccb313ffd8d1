"""Acceptance gate: one test per contract criterion, run with -v for the
one-line-per-criterion view.

Each test states its tolerance inline and enforces its runtime budget, so a
pass here means the shipped behavior, not a relaxed approximation of it.
"""

import itertools
import json
import math
import random
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from _assignment_oracle import brute_force_assignment
from histoagent.adapters import ReplayAdapter, parse_adapter_spec
from histoagent.agent import AgentConfig, CodeAgent
from histoagent.bench.questions import QuestionSpec, Tolerance
from histoagent.bench.report import weighted_overall
from histoagent.bench.scoring import compare_value, evaluate_answer, hungarian_assign
from histoagent.interp import InterpreterLimits, run_source
from histoagent.runner import RunConfig, run_benchmark
from histoagent.tools.geometry import closed_perimeter, convex_hull, shoelace_area

REPO = Path(__file__).resolve().parent.parent
MINIBENCH = REPO / "minibench"

COUNTS = (25, 25, 25, 15)

# published per-category means and their weighted averages, both tables,
# all four baseline rows
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


@contextmanager
def deadline(seconds):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"criterion took {elapsed:.2f}s, budget {seconds}s"


def test_published_average_reproduction():
    # weighted overall within +/- 0.0005 of the published column, < 1 s
    with deadline(1.0):
        for rows in (SCORE_ROWS, FAILURE_ROWS):
            for name, (means, published) in rows.items():
                got = weighted_overall(means, COUNTS)
                assert abs(got - published) <= 0.0005 + 1e-12, (
                    f"{name}: {got} vs published {published}"
                )


_MODE_REPORTS = {}


def _run_minibench(mode, out_dir):
    config = RunConfig(
        suite_dir=MINIBENCH / "suite",
        dataset_root=MINIBENCH / "dataset",
        mode=mode,
        adapter_spec=parse_adapter_spec(f"replay:{MINIBENCH / 'replays' / mode}"),
        output_dir=out_dir,
        trials=1,
        parallelism=1,
        seed=42,
        time_budget_seconds=600.0,
        max_steps=20,
        tool_fixture_root=MINIBENCH / "dataset" / "tool_fixtures",
    )
    outcome = run_benchmark(config)
    assert outcome.completed
    return outcome.report_path.read_bytes()


def test_mini_benchmark_end_to_end(tmp_path):
    # per-question scores exactly equal to the frozen oracle file, and
    # report.json byte-identical across two invocations, < 60 s
    expected = json.loads((MINIBENCH / "expected_scores.json").read_text())
    with deadline(60.0):
        for mode in ("llm_only", "single_shot", "iterative", "with_tools"):
            _MODE_REPORTS[mode] = _run_minibench(mode, tmp_path / mode)
        repeat = _run_minibench("with_tools", tmp_path / "with_tools_repeat")

    assert repeat == _MODE_REPORTS["with_tools"], "report.json not byte-identical"

    for mode, per_question in expected["per_question_scores"].items():
        report = json.loads(_MODE_REPORTS[mode])
        assert set(report["questions"]) == set(per_question)
        for qid, want in per_question.items():
            got = report["questions"][qid]["scores"]
            assert got == [want], f"{mode}/{qid}: {got} != [{want}]"
        failed = {
            qid
            for qid, record in report["questions"].items()
            if all(record["failed"])
        }
        assert failed == set(expected["failed_questions"][mode]), mode


def test_baseline_mode_ladder(tmp_path):
    # llm_only exactly 0; the authored fixtures realize a strict ordering
    # through with_tools, < 90 s
    with deadline(90.0):
        for mode in ("llm_only", "single_shot", "iterative", "with_tools"):
            if mode not in _MODE_REPORTS:
                _MODE_REPORTS[mode] = _run_minibench(mode, tmp_path / mode)
        overall = {
            mode: json.loads(data)["overall"]["score"]
            for mode, data in _MODE_REPORTS.items()
        }
    assert overall["llm_only"] == 0.0
    assert (
        overall["llm_only"]
        < overall["single_shot"]
        < overall["iterative"]
        < overall["with_tools"]
    ), overall
    assert overall["with_tools"] == 1.0


def test_interpreter_confinement(tmp_path):
    with deadline(30.0):
        limits = InterpreterLimits(working_dir=tmp_path / "jail", random_seed=7)

        # forbidden import refuses before anything else runs
        result = run_source(
            'import os\nfh = open("pwned.txt", "w")\nfh.write("x")\nfh.close()',
            limits,
        )
        assert result.error is not None and result.error.kind == "ForbiddenImport"
        assert not (tmp_path / "jail" / "pwned.txt").exists()

        # the operation budget binds exactly: the measured cost passes,
        # one less trips the limit
        counting = "total = 0\nfor i in range(10):\n    total = total + i\nfinal_answer(total)"
        baseline = run_source(counting, limits)
        assert baseline.answered and baseline.final_answer == 45
        cost = baseline.operations_used
        exact = run_source(
            counting,
            InterpreterLimits(working_dir=tmp_path / "jail", max_operations=cost),
        )
        assert exact.answered and exact.operations_used == cost
        short = run_source(
            counting,
            InterpreterLimits(working_dir=tmp_path / "jail", max_operations=cost - 1),
        )
        assert short.error is not None
        assert short.error.kind == "OperationLimitExceeded"

        # escape attempts: relative traversal, absolute path, nested dotdot
        for attempt in ("../leak.txt", "/tmp/leak_abs.txt", "sub/../../leak2.txt"):
            escaped = run_source(f'fh = open("{attempt}", "w")', limits)
            assert escaped.error is not None
            assert escaped.error.kind == "SandboxViolation", attempt
        assert not (tmp_path / "leak.txt").exists()
        assert not (tmp_path / "leak2.txt").exists()
        assert not Path("/tmp/leak_abs.txt").exists()

        # seeded randomness is bitwise reproducible over 1,000 draws
        draws = (
            "import random\nvalues = []\nfor i in range(1000):\n"
            "    values.append(random.random())\nfinal_answer(values)"
        )
        first = run_source(draws, limits)
        second = run_source(draws, limits)
        assert first.answered and len(first.final_answer) == 1000
        assert first.final_answer == second.final_answer


def test_assignment_optimality():
    # 500 random integer matrices, n and m up to 7: totals equal the
    # exhaustive-permutation minimum in every case, < 30 s
    with deadline(30.0):
        rng = random.Random(20260822)
        for trial in range(500):
            n = rng.randint(1, 7)
            m = rng.randint(1, 7)
            cost = [[rng.randint(0, 20) for _ in range(m)] for _ in range(n)]
            pairs = hungarian_assign(cost)
            total = sum(cost[r][c] for r, c in pairs)
            _, oracle_total = brute_force_assignment(cost)
            assert total == oracle_total, f"trial {trial}: {total} != {oracle_total}"


def _gift_wrap(points):
    pts = sorted(set(points))
    if len(pts) < 3:
        return pts
    hull = [pts[0]]
    current = pts[0]
    while True:
        candidate = None
        for p in pts:
            if p == current:
                continue
            if candidate is None:
                candidate = p
                continue
            cross = (candidate[0] - current[0]) * (p[1] - current[1]) - (
                candidate[1] - current[1]
            ) * (p[0] - current[0])
            if cross < 0:
                candidate = p
            elif cross == 0:
                if math.dist(current, p) > math.dist(current, candidate):
                    candidate = p
        if candidate == hull[0]:
            break
        hull.append(candidate)
        current = candidate
    return hull


def _raster_area(poly, cells=600):
    xs = np.array([p[0] for p in poly])
    ys = np.array([p[1] for p in poly])
    pad = 0.01
    min_x, max_x = xs.min() - pad, xs.max() + pad
    min_y, max_y = ys.min() - pad, ys.max() + pad
    step_x = (max_x - min_x) / cells
    step_y = (max_y - min_y) / cells
    grid_x, grid_y = np.meshgrid(
        min_x + step_x * (np.arange(cells) + 0.5),
        min_y + step_y * (np.arange(cells) + 0.5),
    )
    inside = np.zeros(grid_x.shape, dtype=bool)
    next_xs = np.roll(xs, -1)
    next_ys = np.roll(ys, -1)
    for x1, y1, x2, y2 in zip(xs, ys, next_xs, next_ys):
        crosses = (y1 <= grid_y) != (y2 <= grid_y)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_at = x1 + (grid_y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (grid_x < x_at)
    return inside.sum() * step_x * step_y


def _star_polygon(rng, n):
    angles = sorted(rng.uniform(0, 2 * math.pi) for _ in range(n))
    return [
        (r * math.cos(a), r * math.sin(a))
        for a, r in ((a, rng.uniform(1.5, 2.0)) for a in angles)
    ]


def test_geometry_oracles():
    rng = random.Random(31415)

    # hull equals an independent gift-wrap oracle on 200 random sets
    for _ in range(200):
        n = rng.randint(3, 12)
        points = [(rng.uniform(0, 10), rng.uniform(0, 10)) for _ in range(n)]
        ours = convex_hull(points)
        oracle = _gift_wrap(points)
        assert set(ours) == set(oracle), points
        assert shoelace_area(ours) == shoelace_area(oracle)

    # shoelace area within 1% of a rasterization oracle on 100 polygons
    for _ in range(100):
        poly = _star_polygon(rng, rng.randint(8, 16))
        analytic = shoelace_area(poly)
        rastered = _raster_area(poly)
        assert abs(analytic - rastered) <= 0.01 * rastered, (analytic, rastered)

    # scaling laws: area by k squared, perimeter by k, to 1e-9 relative
    for _ in range(50):
        poly = _star_polygon(rng, rng.randint(5, 12))
        base_area = shoelace_area(poly)
        base_perimeter = closed_perimeter(poly)
        for k in (0.5, 3.0, 7.25):
            scaled = [(x * k, y * k) for x, y in poly]
            assert math.isclose(
                shoelace_area(scaled), k * k * base_area, rel_tol=1e-9
            )
            assert math.isclose(
                closed_perimeter(scaled), k * base_perimeter, rel_tol=1e-9
            )


def _make_spec(tolerances, id_column=None):
    return QuestionSpec(
        id="acceptance",
        data_type="summary_of_multiple_wsi",
        question="q",
        additional_instructions="",
        output_instructions="write {working_dir}/answer.json",
        rationale="r",
        is_pathologist_verified=True,
        is_biomedical_scientist_verified=True,
        columns_to_compare_and_tolerance=tolerances,
        id_column=id_column,
    )


def test_evaluator_properties(tmp_path):
    rng = random.Random(97)

    # 1,000 generated (truth, prediction, tolerance) triples: widening the
    # tolerance never lowers a cell score, and truth 0 scores by absolute
    # magnitude against the tolerance itself
    zero_truth_seen = 0
    for _ in range(1000):
        truth = 0.0 if rng.random() < 0.2 else round(rng.uniform(-50, 50), 3)
        tol = rng.choice([0.0, 0.01, 0.05, 0.15, 0.5, 1.0])
        if rng.random() < 0.5:
            predicted = truth + rng.uniform(-2.0, 2.0)
        else:
            predicted = round(rng.uniform(-60, 60), 3)
        widened = tol + rng.choice([0.0, 0.1, 1.0])
        narrow = compare_value(predicted, truth, Tolerance.relative_numeric(tol))
        wide = compare_value(predicted, truth, Tolerance.relative_numeric(widened))
        assert narrow in (0, 1) and wide in (0, 1)
        assert wide >= narrow, (predicted, truth, tol)
        if truth == 0.0:
            zero_truth_seen += 1
            assert narrow == (1 if abs(predicted) <= tol else 0)
    assert zero_truth_seen > 100

    # record order never matters under assignment alignment
    spec = _make_spec(
        {
            "mass": Tolerance.relative_numeric(0.15),
            "count": Tolerance.relative_numeric(0.15),
        }
    )
    truth_records = [
        {"mass": 10.0, "count": 3},
        {"mass": 22.5, "count": 7},
        {"mass": 40.0, "count": 1},
        {"mass": 63.0, "count": 9},
    ]
    predictions = [
        {"mass": 10.2, "count": 3},
        {"mass": 90.0, "count": 7},
        {"mass": 41.0, "count": 1},
        {"mass": 63.0, "count": 2},
    ]
    answer = tmp_path / "answer.json"
    answer.write_text(json.dumps(predictions))
    reference = evaluate_answer(answer, truth_records, spec).score
    for _ in range(100):
        shuffled_predictions = list(predictions)
        shuffled_truth = list(truth_records)
        rng.shuffle(shuffled_predictions)
        rng.shuffle(shuffled_truth)
        answer.write_text(json.dumps(shuffled_predictions))
        assert evaluate_answer(answer, shuffled_truth, spec).score == reference

    # a missing answer file scores zero and counts as failed
    missing = evaluate_answer(tmp_path / "absent.json", truth_records, spec)
    assert missing.score == 0.0
    assert missing.produced_valid_file is False
    assert missing.failed is True


def test_loop_contracts(tmp_path):
    with deadline(30.0):
        # a 25-step conversation truncates at the 20-step cap
        fixture = [{"thought": f"s{i}", "code": "print(1)"} for i in range(25)]
        agent = CodeAgent(
            AgentConfig(mode="iterative", max_steps=20),
            ReplayAdapter(fixture),
            workspace=tmp_path / "cap",
        )
        run = agent.run_query("count forever")
        assert len(run.steps) == 20
        assert run.terminated_by == "step_cap"

        # single_shot executes exactly one block even with more on offer
        agent = CodeAgent(
            AgentConfig(mode="single_shot"),
            ReplayAdapter(
                [
                    {"thought": "only", "code": "print(5)"},
                    {"thought": "never", "code": "print(6)"},
                ]
            ),
            workspace=tmp_path / "single",
        )
        run = agent.run_query("one chance")
        assert len(run.steps) == 1
        assert run.steps[0].observation == "5"

        # memory reset leaves no residue: the transcript snapshot after a
        # query equals the pre-query snapshot
        agent = CodeAgent(
            AgentConfig(mode="iterative", reset_memory_after_query=True),
            ReplayAdapter(
                [
                    {"thought": "a", "code": "final_answer(1)"},
                    {"thought": "b", "code": "final_answer(2)"},
                ]
            ),
            workspace=tmp_path / "reset",
        )
        before = agent.transcript()
        first_dir = agent.working_dir
        agent.run_query("first")
        assert agent.transcript() == before
        assert agent.working_dir != first_dir
        second = agent.run_query("second")
        assert second.steps[0].index == 1  # numbering restarted

        # case-study preset: memory retained, step indexes continue
        agent = CodeAgent(
            AgentConfig.case_study(mode="iterative"),
            ReplayAdapter(
                [
                    {"thought": "a", "code": "final_answer(1)"},
                    {"thought": "b", "code": "final_answer(2)"},
                ]
            ),
            workspace=tmp_path / "case",
        )
        first = agent.run_query("gather")
        length_after_first = len(agent.transcript())
        second = agent.run_query("refine")
        assert first.steps[0].index == 1
        assert second.steps[0].index == len(first.steps) + 1
        # one user turn plus assistant/observation per step
        expected_growth = 1 + 2 * len(second.steps)
        assert len(agent.transcript()) == length_after_first + expected_growth
        assert agent.working_dir == agent.workspace / "run_0000"
