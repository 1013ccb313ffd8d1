"""Suite runner: trials, per-question isolation, parallelism, reports."""

from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .adapters import AdapterSpec, ReplayAdapter, build_adapter
from .agent import MODES, AgentConfig, CodeAgent
from .bench import (
    SchemaError,
    aggregate,
    evaluate_answer,
    load_suite,
    materialize_prompt,
    write_report,
)
from .interp import InterpreterLimits
from .tools import build_default_registry

log = logging.getLogger(__name__)


class RunnerError(Exception):
    pass


class ConfigError(RunnerError):
    pass


class SuiteLoadError(RunnerError):
    pass


class TimeBudgetExceeded(RunnerError):
    """A question hit its wall-clock budget. Recorded, never raised mid-suite."""


@dataclass(frozen=True)
class RunConfig:
    suite_dir: Path
    dataset_root: Path
    mode: str
    adapter_spec: AdapterSpec
    output_dir: Path
    trials: int = 3
    parallelism: int = 1
    seed: int = 42
    time_budget_seconds: float = 1800.0
    max_steps: int = 20
    tool_fixture_root: Path | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got '{self.mode}'")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")
        if self.time_budget_seconds <= 0:
            raise ConfigError("time budget must be positive")


@dataclass(frozen=True)
class SingleRunRecord:
    trial: int
    question_id: str
    working_dir: Path
    terminated_by: str
    steps: int
    cancelled: bool
    fatal_cause: str | None
    timed_out: bool
    crashed: bool


@dataclass(frozen=True)
class BenchmarkOutcome:
    report: object
    report_path: Path
    completed: bool
    records: list


def question_seed(base_seed, trial, question_id):
    """Interpreter seed for one (trial, question) cell.

    sha256 over "{base_seed}:{trial}:{question_id}", low 32 bits. Stable
    across processes and platforms, unlike hash().
    """

    digest = hashlib.sha256(f"{base_seed}:{trial}:{question_id}".encode()).digest()
    return int.from_bytes(digest[:4], "big")


def _fixture_for(spec_path, question_id):
    return Path(spec_path) / f"{question_id}.json"


def _make_adapter(config, question_id):
    spec = config.adapter_spec
    if spec.kind == "replay" and Path(spec.replay_path).is_dir():
        return ReplayAdapter.from_file(_fixture_for(spec.replay_path, question_id))
    return build_adapter(spec)


def _load_truth(suite_dir, question_id):
    path = Path(suite_dir) / "truth" / f"{question_id}.json"
    if not path.is_file():
        raise SuiteLoadError(f"no ground truth file for question '{question_id}' at {path}")
    try:
        records = json.loads(path.read_text())
    except ValueError as exc:
        raise SuiteLoadError(f"ground truth {path} is not valid JSON: {exc}") from exc
    if not isinstance(records, list):
        raise SuiteLoadError(f"ground truth {path} must be a JSON array of records")
    return records


def run_single(question, config, trial, registry=None):
    """Run one question in one trial and score its answer file."""

    question_dir = Path(config.output_dir) / f"trial_{trial}" / question.id
    adapter = _make_adapter(config, question.id)
    limits = InterpreterLimits(
        working_dir=Path("."),
        random_seed=question_seed(config.seed, trial, question.id),
    )
    agent_config = AgentConfig(
        mode=config.mode, max_steps=config.max_steps, limits=limits
    )
    agent = CodeAgent(
        agent_config,
        adapter,
        registry=registry,
        workspace=question_dir,
        path_aliases={str(Path(config.dataset_root).resolve()): "{dataset}"},
    )

    prompt = materialize_prompt(question, config.dataset_root, agent.working_dir)
    deadline = time.monotonic() + config.time_budget_seconds
    run = agent.run_query(prompt, should_stop=lambda: time.monotonic() > deadline)
    timed_out = run.cancelled and time.monotonic() > deadline

    truth = _load_truth(config.suite_dir, question.id)
    score = evaluate_answer(run.working_dir / "answer.json", truth, question)
    record = SingleRunRecord(
        trial=trial,
        question_id=question.id,
        working_dir=run.working_dir,
        terminated_by=run.terminated_by,
        steps=len(run.steps),
        cancelled=run.cancelled,
        fatal_cause=run.fatal_cause,
        timed_out=timed_out,
        crashed=False,
    )
    return record, score


def run_benchmark(config):
    """Run the whole suite: trials outer and sequential, questions parallel."""

    try:
        suite = load_suite(config.suite_dir)
    except SchemaError as exc:
        raise SuiteLoadError(str(exc)) from exc
    for question in suite:
        if question.category is None:
            raise SuiteLoadError(f"question '{question.id}' has no category")
        _load_truth(config.suite_dir, question.id)

    spec = config.adapter_spec
    if spec.kind == "replay" and Path(spec.replay_path).is_dir():
        for question in suite:
            fixture = _fixture_for(spec.replay_path, question.id)
            if not fixture.is_file():
                raise ConfigError(f"no replay fixture for question '{question.id}' at {fixture}")

    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    registry = None
    if config.mode == "with_tools":
        registry = build_default_registry(
            fixture_root=config.tool_fixture_root, dataset_root=config.dataset_root
        )

    categories = {question.id: question.category for question in suite}
    records = []
    trial_scores = []
    for trial in range(config.trials):
        scores = {}

        def one(question):
            try:
                return question.id, run_single(question, config, trial, registry)
            except RunnerError:
                raise
            except Exception as exc:  # noqa: BLE001 - crash containment per run
                log.exception("question %s crashed in trial %d", question.id, trial)
                question_dir = output_dir / f"trial_{trial}" / question.id
                truth = _load_truth(config.suite_dir, question.id)
                # score whatever artifacts the crashed run left behind
                score = evaluate_answer(
                    question_dir / "run_0000" / "answer.json", truth, question
                )
                record = SingleRunRecord(
                    trial=trial,
                    question_id=question.id,
                    working_dir=question_dir,
                    terminated_by="crashed",
                    steps=0,
                    cancelled=False,
                    fatal_cause=f"{type(exc).__name__}: {exc}",
                    timed_out=False,
                    crashed=True,
                )
                return question.id, (record, score)

        if config.parallelism == 1:
            results = [one(question) for question in suite]
        else:
            with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
                results = list(pool.map(one, suite))
        for qid, (record, score) in results:
            records.append(record)
            scores[qid] = score
        trial_scores.append(scores)

    report = aggregate(trial_scores, categories)
    report_path = write_report(report, output_dir / "report.json")
    _write_run_index(output_dir, records)
    completed = not any(record.crashed for record in records)
    return BenchmarkOutcome(
        report=report, report_path=report_path, completed=completed, records=records
    )


def _write_run_index(output_dir, records):
    rows = [
        {
            "trial": record.trial,
            "question_id": record.question_id,
            "working_dir": str(record.working_dir.relative_to(output_dir)),
            "terminated_by": record.terminated_by,
            "steps": record.steps,
            "cancelled": record.cancelled,
            "fatal_cause": record.fatal_cause,
            "timed_out": record.timed_out,
            "crashed": record.crashed,
        }
        for record in sorted(records, key=lambda r: (r.trial, r.question_id))
    ]
    path = output_dir / "runs.json"
    path.write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")
    return path
