"""Command line entry point."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .adapters import parse_adapter_spec
from .agent import MODES
from .runner import ConfigError, RunConfig, RunnerError, run_benchmark


def build_parser():
    parser = argparse.ArgumentParser(
        prog="histoagent",
        description="Run computational pathology question suites with a code agent.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run a question suite and write a report")
    run_parser.add_argument("--suite", required=True, type=Path, help="question suite directory")
    run_parser.add_argument("--dataset", required=True, type=Path, help="dataset root directory")
    run_parser.add_argument("--mode", required=True, choices=MODES)
    run_parser.add_argument(
        "--adapter",
        required=True,
        help="'wire' (endpoint from environment) or 'replay:PATH' "
        "(PATH is a fixture file, or a directory with one <question_id>.json per question)",
    )
    run_parser.add_argument("--trials", type=int, default=3)
    run_parser.add_argument("--parallel", type=int, default=1)
    run_parser.add_argument("--out", required=True, type=Path, help="output directory")
    run_parser.add_argument("--seed", type=int, default=42)
    run_parser.add_argument(
        "--time-budget", type=float, default=1800.0, help="per-question seconds"
    )
    run_parser.add_argument("--max-steps", type=int, default=20)
    run_parser.add_argument(
        "--tool-fixtures",
        type=Path,
        default=None,
        help="tool playback fixture root; defaults to <dataset>/tool_fixtures when present",
    )
    run_parser.add_argument("-v", "--verbose", action="store_true")

    serve_parser = sub.add_parser("serve", help="run the interactive session service")
    serve_parser.add_argument("--host", default="127.0.0.1")
    serve_parser.add_argument("--port", type=int, default=8765)
    serve_parser.add_argument(
        "--workspace", type=Path, default=None, help="session working dir root"
    )
    serve_parser.add_argument("--dataset", type=Path, default=None)
    serve_parser.add_argument(
        "--tool-fixtures",
        type=Path,
        default=None,
        help="tool playback fixture root; defaults to <dataset>/tool_fixtures when present",
    )
    serve_parser.add_argument(
        "--adapter", default=None, help="default adapter spec for new sessions"
    )
    serve_parser.add_argument(
        "--ttl", type=float, default=7200.0, help="idle session expiry, seconds"
    )
    serve_parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _run(args):
    try:
        adapter_spec = parse_adapter_spec(args.adapter)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    tool_fixtures = args.tool_fixtures
    if tool_fixtures is None:
        candidate = args.dataset / "tool_fixtures"
        if candidate.is_dir():
            tool_fixtures = candidate

    config = RunConfig(
        suite_dir=args.suite,
        dataset_root=args.dataset,
        mode=args.mode,
        adapter_spec=adapter_spec,
        output_dir=args.out,
        trials=args.trials,
        parallelism=args.parallel,
        seed=args.seed,
        time_budget_seconds=args.time_budget,
        max_steps=args.max_steps,
        tool_fixture_root=tool_fixtures,
    )
    outcome = run_benchmark(config)
    report = outcome.report
    print(f"trials: {report.trials}")
    for name, stats in report.categories.items():
        print(
            f"{name}: score {stats.score_mean:.3f} +/- {stats.score_sem:.3f} "
            f"(n={stats.n_questions}, failure rate {stats.failure_rate:.3f})"
        )
    print(f"overall: score {report.overall_score:.3f}, "
          f"failure rate {report.overall_failure_rate:.3f}")
    print(f"report: {outcome.report_path}")
    if not outcome.completed:
        crashed = [r.question_id for r in outcome.records if r.crashed]
        print(f"incomplete: {len(crashed)} crashed runs: {sorted(set(crashed))}", file=sys.stderr)
        return 1
    return 0


def _serve(args):
    try:
        import uvicorn
    except ImportError as exc:
        raise ConfigError(
            "the serve command needs uvicorn (pip install histoagent[serve])"
        ) from exc
    from .service import ServiceConfig, create_app

    tool_fixtures = args.tool_fixtures
    if tool_fixtures is None and args.dataset is not None:
        candidate = args.dataset / "tool_fixtures"
        if candidate.is_dir():
            tool_fixtures = candidate
    config = ServiceConfig(
        workspace_root=args.workspace,
        dataset_root=args.dataset,
        tool_fixture_root=tool_fixtures,
        default_adapter_spec=args.adapter,
        session_ttl_seconds=args.ttl,
    )
    uvicorn.run(
        create_app(config),
        host=args.host,
        port=args.port,
        log_level="debug" if args.verbose else "info",
    )
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        if args.command == "run":
            return _run(args)
        if args.command == "serve":
            return _serve(args)
        raise ConfigError(f"unknown command '{args.command}'")
    except RunnerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
