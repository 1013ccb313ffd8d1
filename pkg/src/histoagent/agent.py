"""The thought/code agent loop.

One query = up to max_steps iterations of: ask the model for a JSON
{thought, code} step, run the code in the restricted interpreter, feed the
observation back.  Four modes cover the baseline ladder: llm_only never
executes anything, single_shot executes exactly one step, iterative loops
without tools, with_tools loops with the registry bound into the runtime.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from .adapters import AdapterError, ChatMessage
from .interp import InterpreterLimits, run_source
from .tools import ToolRegistry

log = logging.getLogger("histoagent.agent")

MODES = ("llm_only", "single_shot", "iterative", "with_tools")

NO_OUTPUT_MARKER = "(no output)"


def default_general_instructions() -> str:
    return (
        resources.files("histoagent")
        .joinpath("assets/general_instructions.txt")
        .read_text(encoding="utf-8")
    )


def default_special_instructions() -> str:
    return (
        resources.files("histoagent")
        .joinpath("assets/special_instructions.txt")
        .read_text(encoding="utf-8")
    )


@dataclass(frozen=True)
class AgentConfig:
    max_steps: int = 20
    mode: str = "with_tools"
    tool_categories: tuple[str, ...] | None = None
    general_instructions: str | None = None
    special_instructions: str | None = None
    reset_memory_after_query: bool = True
    limits: InterpreterLimits = field(
        default_factory=lambda: InterpreterLimits(working_dir=Path("."))
    )
    observation_cap_bytes: int = 8192

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode '{self.mode}'")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.observation_cap_bytes < 64:
            raise ValueError("observation_cap_bytes must be >= 64")

    @classmethod
    def case_study(cls, **overrides) -> "AgentConfig":
        """Interactive preset: long leash, memory kept across queries."""
        values = {"max_steps": 200, "reset_memory_after_query": False}
        values.update(overrides)
        return cls(**values)


@dataclass(frozen=True)
class AgentStep:
    index: int
    thought: str
    code: str
    observation: str
    operations_used: int
    is_final: bool
    duration: float


@dataclass
class AgentRun:
    query: str
    steps: list[AgentStep]
    final_answer: object
    answered: bool
    working_dir: Path
    terminated_by: str  # final_answer | step_cap | fatal_error
    total_duration: float
    cancelled: bool = False
    fatal_cause: str | None = None


def build_system_prompt(
    general: str,
    registry: ToolRegistry | None = None,
    categories: Sequence[str] | None = None,
    special: str = "",
) -> str:
    """Fixed three-section prompt; the tool section is empty when no
    registry is supplied (all modes but with_tools)."""
    if not general.strip():
        raise ValueError("general instructions must be non-empty")
    tool_docs = ""
    if registry is not None:
        tool_docs = registry.render_docs(
            list(categories) if categories is not None else None
        )
    parts = ["# General Instructions", "", general.strip(), "", "# Tools", ""]
    if tool_docs:
        parts += [tool_docs, ""]
    parts += ["# Special Instructions", "", special.strip()]
    return "\n".join(parts)


def truncate_observation(text: str, cap_bytes: int) -> str:
    """Byte cap with head and tail kept; the middle is elided."""
    data = text.encode("utf-8")
    if len(data) <= cap_bytes:
        return text
    half = cap_bytes // 2
    head = data[:half].decode("utf-8", errors="ignore")
    tail = data[len(data) - half :].decode("utf-8", errors="ignore")
    omitted = len(data) - 2 * half
    return f"{head}\n... [{omitted} bytes truncated] ...\n{tail}"


def normalize_paths(text: str, aliases: dict[str, str]) -> str:
    """Replace machine-specific path prefixes with stable placeholders."""
    expanded: dict[str, str] = {}
    for real, placeholder in aliases.items():
        expanded[real] = placeholder
        resolved = str(Path(real).resolve())
        expanded.setdefault(resolved, placeholder)
    for real in sorted(expanded, key=len, reverse=True):
        text = text.replace(real, expanded[real])
    return text


class CodeAgent:
    """One agent instance: private memory, private working directory."""

    def __init__(
        self,
        config: AgentConfig,
        adapter,
        registry: ToolRegistry | None = None,
        workspace: Path | str = "workspace",
        path_aliases: dict[str, str] | None = None,
    ):
        if config.mode == "with_tools" and (registry is None or len(registry) == 0):
            raise ValueError("mode with_tools needs a non-empty tool registry")
        self.config = config
        self.adapter = adapter
        self.registry = registry
        self.workspace = Path(workspace)
        self.path_aliases = dict(path_aliases or {})
        general = config.general_instructions
        special = config.special_instructions
        if general is None:
            general = default_general_instructions()
        if special is None:
            special = default_special_instructions()
        self.system_prompt = build_system_prompt(
            general,
            registry if config.mode == "with_tools" else None,
            config.tool_categories,
            special,
        )
        self._bindings = (
            registry.interpreter_bindings()
            if (config.mode == "with_tools" and registry is not None)
            else {}
        )
        self._memory: list[ChatMessage] = []
        self._step_counter = 0  # continues across queries until reset
        self._run_counter = 0
        self._dir_used = False
        self.working_dir = self.workspace / "run_0000"
        self.working_dir.mkdir(parents=True, exist_ok=True)

    # -- lifecycle ---------------------------------------------------------

    def reset(self) -> None:
        """Clear memory and rotate to a fresh working directory.

        A fresh agent that has not run anything keeps its directory, so
        reset before first use is a no-op.
        """
        if not self._memory and not self._dir_used and self._step_counter == 0:
            return
        self._memory = []
        self._step_counter = 0
        self._run_counter += 1
        self._dir_used = False
        self.working_dir = self.workspace / f"run_{self._run_counter:04d}"
        self.working_dir.mkdir(parents=True, exist_ok=True)

    def transcript(self) -> list[ChatMessage]:
        return [ChatMessage("system", self.system_prompt)] + list(self._memory)

    # -- the loop ----------------------------------------------------------

    def run_query(
        self,
        query: str,
        should_stop: Callable[[], bool] | None = None,
        on_step: Callable[[AgentStep], None] | None = None,
    ) -> AgentRun:
        """Drive one query to completion.

        should_stop is polled between steps; a running step always finishes.
        on_step fires after each completed step and must not raise.
        """
        self._dir_used = True
        started = time.perf_counter()
        self._memory.append(ChatMessage("user", query))
        limits = dataclasses.replace(self.config.limits, working_dir=self.working_dir)
        max_this_run = 1 if self.config.mode == "single_shot" else self.config.max_steps

        steps: list[AgentStep] = []
        final_answer: object = None
        answered = False
        terminated_by = "step_cap"
        cancelled = False
        fatal_cause: str | None = None

        for step_in_run in range(1, max_this_run + 1):
            if should_stop is not None and should_stop():
                cancelled = True
                terminated_by = "step_cap"
                break
            step_started = time.perf_counter()
            try:
                output = self.adapter.complete_step(self.transcript())
            except AdapterError as exc:
                terminated_by = "fatal_error"
                fatal_cause = f"{exc.__class__.__name__}: {exc}"
                log.error("adapter failed, run aborted: %s", fatal_cause)
                break
            self._step_counter += 1
            if self.config.mode == "llm_only":
                step = AgentStep(
                    index=self._step_counter,
                    thought=output.thought,
                    code=output.code,
                    observation="",
                    operations_used=0,
                    is_final=True,
                    duration=time.perf_counter() - step_started,
                )
                steps.append(step)
                if on_step is not None:
                    on_step(step)
                self._memory.append(ChatMessage("assistant", output.raw))
                self._memory.append(ChatMessage("observation", ""))
                # the textual reply is the whole answer in this mode
                final_answer = output.thought
                answered = True
                terminated_by = "final_answer"
                break
            result = run_source(output.code, limits, bindings=self._bindings)
            observation = self._build_observation(result)
            step = AgentStep(
                index=self._step_counter,
                thought=output.thought,
                code=output.code,
                observation=observation,
                operations_used=result.operations_used,
                is_final=result.answered,
                duration=time.perf_counter() - step_started,
            )
            steps.append(step)
            if on_step is not None:
                on_step(step)
            self._memory.append(ChatMessage("assistant", output.raw))
            self._memory.append(ChatMessage("observation", observation))
            if result.answered:
                final_answer = result.final_answer
                answered = True
                terminated_by = "final_answer"
                break

        run = AgentRun(
            query=query,
            steps=steps,
            final_answer=final_answer,
            answered=answered,
            working_dir=self.working_dir,
            terminated_by=terminated_by,
            total_duration=time.perf_counter() - started,
            cancelled=cancelled,
            fatal_cause=fatal_cause,
        )
        self._persist(run)
        if self.config.reset_memory_after_query:
            self.reset()
        return run

    def _build_observation(self, result) -> str:
        parts = []
        if result.stdout:
            parts.append(result.stdout.rstrip("\n"))
        if result.error is not None:
            parts.append(result.error.render())
        text = "\n".join(parts)
        if not text:
            text = NO_OUTPUT_MARKER
        return truncate_observation(text, self.config.observation_cap_bytes)

    # -- persistence -------------------------------------------------------

    def _aliases_for(self, working_dir: Path) -> dict[str, str]:
        aliases = {str(working_dir): "{workdir}"}
        aliases.update(self.path_aliases)
        return aliases

    def _persist(self, run: AgentRun) -> None:
        aliases = self._aliases_for(run.working_dir)

        def clean(text: str) -> str:
            return normalize_paths(text, aliases)

        lines = []
        for step in run.steps:
            # durations stay out of the file so replay runs are byte-stable
            lines.append(
                json.dumps(
                    {
                        "index": step.index,
                        "thought": clean(step.thought),
                        "code": clean(step.code),
                        "observation": clean(step.observation),
                        "operations_used": step.operations_used,
                        "is_final": step.is_final,
                    },
                    ensure_ascii=True,
                )
            )
        steps_path = run.working_dir / "steps.jsonl"
        steps_path.write_text(
            "".join(line + "\n" for line in lines), encoding="utf-8"
        )

        answer = run.final_answer
        if isinstance(answer, str):
            answer = clean(answer)
        summary = {
            "query": clean(run.query),
            "steps": len(run.steps),
            "final_answer": answer,
            "answered": run.answered,
            "terminated_by": run.terminated_by,
            "cancelled": run.cancelled,
            "fatal_cause": run.fatal_cause,
            "working_dir": "{workdir}",
            "total_duration": run.total_duration,
        }
        (run.working_dir / "run.json").write_text(
            json.dumps(summary, indent=2, ensure_ascii=True) + "\n", encoding="utf-8"
        )
