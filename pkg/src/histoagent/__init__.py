"""Iterative code agent for histology analysis.

Subpackages:
    interp   restricted script language (parser, evaluator, module shims)
    tools    tool registry, geometry tools, fixture-backed tools
    bench    benchmark question schema, scoring, aggregation

Top-level modules:
    adapters model backends (wire protocol client, deterministic replay)
    agent    the thought/code loop and its artifacts
    runner   benchmark experiment runner
    service  interactive session HTTP service
    cli      command line entry point
"""

__version__ = "0.1.0"
