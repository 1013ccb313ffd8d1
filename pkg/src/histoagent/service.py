"""HTTP facade for interactive agent sessions.

A session wraps one CodeAgent with the case-study preset (long step leash,
memory kept across queries) plus a private working directory. Clients create
a session, post queries one at a time, watch steps arrive on a server-sent
event stream, and browse whatever files the agent wrote.

The stream contract: every run emits its steps as `step` events followed by
exactly one `summary` event, ids numbered from 1. Events are stored per run,
so late subscribers get a full replay and a reconnect with Last-Event-ID
resumes mid-run without duplicates.
"""

from __future__ import annotations

import asyncio
import hashlib
import json
import logging
import mimetypes
import tempfile
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response, StreamingResponse
from pydantic import BaseModel, ConfigDict

from .adapters import build_adapter, parse_adapter_spec
from .agent import AgentConfig, AgentRun, AgentStep, CodeAgent, normalize_paths
from .interp import InterpreterLimits
from .tools import ToolRegistry, build_default_registry

log = logging.getLogger("histoagent.service")

STREAM_POLL_SECONDS = 0.05


class ServiceError(Exception):
    """Base for the session domain errors; subclass name is the wire kind."""

    status_code = 400


class UnknownSession(ServiceError):
    status_code = 404


class UnknownRun(ServiceError):
    status_code = 404


class SessionBusy(ServiceError):
    status_code = 409


class SessionClosed(ServiceError):
    status_code = 409


class PathEscape(ServiceError):
    status_code = 400


class ArtifactNotFound(ServiceError):
    status_code = 404


@dataclass
class ServiceConfig:
    """Server-side knobs shared by every session."""

    workspace_root: Path | None = None
    dataset_root: Path | None = None
    tool_fixture_root: Path | None = None
    default_adapter_spec: str | None = None
    session_ttl_seconds: float = 7200.0

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        import os

        def path_or_none(name):
            value = os.environ.get(name, "")
            return Path(value) if value else None

        ttl = os.environ.get("HISTOAGENT_SESSION_TTL", "")
        return cls(
            workspace_root=path_or_none("HISTOAGENT_WORKSPACE"),
            dataset_root=path_or_none("HISTOAGENT_DATASET"),
            tool_fixture_root=path_or_none("HISTOAGENT_TOOL_FIXTURES"),
            default_adapter_spec=os.environ.get("HISTOAGENT_ADAPTER") or None,
            session_ttl_seconds=float(ttl) if ttl else 7200.0,
        )


@dataclass
class RunState:
    """Event log for one query run; append-only, replayed to subscribers."""

    id: str
    events: list = field(default_factory=list)  # (event_id, name, json_str)
    done: bool = False
    cancel: threading.Event = field(default_factory=threading.Event)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def append(self, name: str, payload: dict) -> None:
        with self.lock:
            self.events.append(
                (len(self.events) + 1, name, json.dumps(payload, ensure_ascii=True))
            )

    def snapshot(self, after: int = 0) -> list:
        with self.lock:
            return list(self.events[after:])


@dataclass
class Session:
    id: str
    agent: CodeAgent
    adapter_spec: str
    created_at: float
    last_activity: float
    status: str = "idle"  # idle | running | closed
    runs: dict = field(default_factory=dict)
    run_order: list = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def config_payload(self) -> dict:
        cfg = self.agent.config
        return {
            "mode": cfg.mode,
            "max_steps": cfg.max_steps,
            "reset_memory_after_query": cfg.reset_memory_after_query,
            "tool_categories": (
                list(cfg.tool_categories) if cfg.tool_categories else None
            ),
            "observation_cap_bytes": cfg.observation_cap_bytes,
            "adapter": self.adapter_spec,
        }


def _step_payload(step: AgentStep, aliases: dict) -> dict:
    def clean(text):
        return normalize_paths(text, aliases)

    return {
        "index": step.index,
        "thought": clean(step.thought),
        "code": clean(step.code),
        "observation": clean(step.observation),
        "operations_used": step.operations_used,
        "is_final": step.is_final,
        "duration": step.duration,
    }


def _summary_payload(run: AgentRun, aliases: dict) -> dict:
    def clean(text):
        return normalize_paths(text, aliases)

    answer = run.final_answer
    if isinstance(answer, str):
        answer = clean(answer)
    return {
        "query": clean(run.query),
        "steps": len(run.steps),
        "final_answer": answer,
        "answered": run.answered,
        "working_dir": "{workdir}",
        "terminated_by": run.terminated_by,
        "total_duration": run.total_duration,
        "cancelled": run.cancelled,
        "fatal_cause": run.fatal_cause,
    }


class SessionManager:
    """All session state and transitions; the HTTP layer stays declarative.

    Thread safety: the manager lock guards the session table, each session's
    lock guards its status and run list, and each run's lock guards its event
    log. Query execution happens on a daemon thread per run; one running
    query per session is enforced by the status field under the session lock.
    """

    def __init__(self, config: ServiceConfig | None = None, clock=time.monotonic):
        self._config = config or ServiceConfig()
        self._clock = clock
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}
        self._registry: ToolRegistry | None = None
        self._workspace_root: Path | None = (
            Path(self._config.workspace_root)
            if self._config.workspace_root is not None
            else None
        )

    # -- plumbing ----------------------------------------------------------

    def _workspace(self) -> Path:
        if self._workspace_root is None:
            self._workspace_root = Path(tempfile.mkdtemp(prefix="histoagent-"))
        self._workspace_root.mkdir(parents=True, exist_ok=True)
        return self._workspace_root

    def _tool_registry(self) -> ToolRegistry:
        # interactive sessions get the full catalog plus the stubbed
        # web-search slot; built once, shared read-only across sessions
        if self._registry is None:
            self._registry = build_default_registry(
                fixture_root=self._config.tool_fixture_root,
                dataset_root=self._config.dataset_root,
                include_web_search=True,
            )
        return self._registry

    def _get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"unknown session '{session_id}'")
        with session.lock:
            idle_for = self._clock() - session.last_activity
            if session.status == "idle" and idle_for > self._config.session_ttl_seconds:
                session.status = "closed"
        return session

    # -- operations --------------------------------------------------------

    def create_session(self, overrides: dict | None = None) -> Session:
        overrides = dict(overrides or {})
        spec_text = overrides.pop("adapter", None) or self._config.default_adapter_spec
        if not spec_text:
            raise ValueError(
                "session needs an adapter ('wire' or 'replay:PATH'); "
                "none given and the server has no default"
            )
        spec = parse_adapter_spec(spec_text)
        if spec.kind == "replay" and spec.replay_path.is_dir():
            raise ValueError(
                "a session replay fixture must be a single conversation file"
            )
        if "tool_categories" in overrides and overrides["tool_categories"] is not None:
            overrides["tool_categories"] = tuple(overrides["tool_categories"])

        session_id = uuid.uuid4().hex
        seed = int.from_bytes(hashlib.sha256(session_id.encode()).digest()[:4], "big")
        overrides.setdefault(
            "limits", InterpreterLimits(working_dir=Path("."), random_seed=seed)
        )
        config = AgentConfig.case_study(**overrides)

        registry = self._tool_registry() if config.mode == "with_tools" else None
        aliases = {}
        if self._config.dataset_root is not None:
            aliases[str(self._config.dataset_root)] = "{dataset}"
        agent = CodeAgent(
            config,
            build_adapter(spec),
            registry=registry,
            workspace=self._workspace() / session_id,
            path_aliases=aliases,
        )
        now = self._clock()
        session = Session(
            id=session_id,
            agent=agent,
            adapter_spec=spec_text,
            created_at=time.time(),
            last_activity=now,
        )
        with self._lock:
            self._sessions[session_id] = session
        log.info("session %s created (mode=%s)", session_id, config.mode)
        return session

    def session_info(self, session_id: str) -> dict:
        session = self._get(session_id)
        with session.lock:
            runs = [
                {
                    "id": rid,
                    "finished": session.runs[rid].done,
                    "events": len(session.runs[rid].events),
                }
                for rid in session.run_order
            ]
            return {
                "id": session.id,
                "status": session.status,
                "config": session.config_payload(),
                "created_at": session.created_at,
                "runs": runs,
            }

    def post_query(self, session_id: str, query: str) -> str:
        session = self._get(session_id)
        with session.lock:
            if session.status == "closed":
                raise SessionClosed(f"session '{session_id}' is closed")
            if session.status == "running":
                raise SessionBusy(f"session '{session_id}' already has a running query")
            session.status = "running"
            run_id = f"r{len(session.run_order) + 1:04d}"
            run = RunState(id=run_id)
            session.runs[run_id] = run
            session.run_order.append(run_id)
            session.last_activity = self._clock()
        thread = threading.Thread(
            target=self._execute, args=(session, run, query), daemon=True
        )
        thread.start()
        return run_id

    def _execute(self, session: Session, run: RunState, query: str) -> None:
        started = time.perf_counter()
        agent = session.agent
        aliases = {str(agent.working_dir): "{workdir}", **agent.path_aliases}
        try:
            result = agent.run_query(
                query,
                should_stop=run.cancel.is_set,
                on_step=lambda step: run.append("step", _step_payload(step, aliases)),
            )
            summary = _summary_payload(result, aliases)
        except Exception as exc:  # contain crashes; the stream must terminate
            log.exception("run %s/%s crashed", session.id, run.id)
            summary = {
                "query": normalize_paths(query, aliases),
                "steps": len(run.events),
                "final_answer": None,
                "answered": False,
                "working_dir": "{workdir}",
                "terminated_by": "fatal_error",
                "total_duration": time.perf_counter() - started,
                "cancelled": False,
                "fatal_cause": f"{exc.__class__.__name__}: {exc}",
            }
        run.append("summary", summary)
        with session.lock:
            run.done = True
            if session.status == "running":
                session.status = "idle"
            session.last_activity = self._clock()

    def get_run(self, session_id: str, run_id: str) -> RunState:
        session = self._get(session_id)
        with session.lock:
            run = session.runs.get(run_id)
        if run is None:
            raise UnknownRun(f"unknown run '{run_id}' in session '{session_id}'")
        return run

    def stop(self, session_id: str) -> bool:
        session = self._get(session_id)
        with session.lock:
            if session.status != "running" or not session.run_order:
                return False
            session.runs[session.run_order[-1]].cancel.set()
            session.last_activity = self._clock()
            return True

    def close(self, session_id: str) -> None:
        # the working directory stays on disk; artifact reads and stream
        # replays keep working, only new queries are rejected
        session = self._get(session_id)
        with session.lock:
            if session.status == "running" and session.run_order:
                session.runs[session.run_order[-1]].cancel.set()
            session.status = "closed"

    # -- artifacts ---------------------------------------------------------

    def list_artifacts(self, session_id: str) -> list[dict]:
        session = self._get(session_id)
        root = session.agent.working_dir
        entries = []
        for path in sorted(root.rglob("*")):
            if path.is_file():
                stat = path.stat()
                entries.append(
                    {
                        "path": path.relative_to(root).as_posix(),
                        "size": stat.st_size,
                        "modified": stat.st_mtime,
                    }
                )
        return entries

    def artifact_path(self, session_id: str, relative: str) -> Path:
        session = self._get(session_id)
        root = session.agent.working_dir.resolve()
        if Path(relative).is_absolute():
            raise PathEscape(f"artifact path must be relative: '{relative}'")
        target = (root / relative).resolve()
        if not target.is_relative_to(root):
            raise PathEscape(f"artifact path escapes the working dir: '{relative}'")
        if not target.is_file():
            raise ArtifactNotFound(f"no artifact at '{relative}'")
        return target


# -- HTTP layer ------------------------------------------------------------


class CreateSessionBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    adapter: str | None = None
    mode: str | None = None
    max_steps: int | None = None
    reset_memory_after_query: bool | None = None
    tool_categories: list[str] | None = None
    observation_cap_bytes: int | None = None

    def overrides(self) -> dict:
        return {k: v for k, v in self.model_dump().items() if v is not None}


class QueryBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    query: str


def _sse_frame(event_id: int, name: str, data: str) -> str:
    return f"id: {event_id}\nevent: {name}\ndata: {data}\n\n"


def create_app(
    config: ServiceConfig | None = None, manager: SessionManager | None = None
) -> FastAPI:
    manager = manager or SessionManager(config)
    app = FastAPI(
        title="histoagent session service",
        description="Interactive agent sessions: queries, live step streams, artifacts.",
        version="0.1.0",
    )
    app.state.manager = manager
    # the browser client is served statically from anywhere, so cross-origin
    # requests (including the event stream) must be allowed
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ServiceError)
    async def service_error(request: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status_code,
            content={"error": exc.__class__.__name__, "detail": str(exc)},
        )

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody | None = None):
        try:
            session = manager.create_session(body.overrides() if body else {})
        except ValueError as exc:
            return JSONResponse(
                status_code=400,
                content={"error": "InvalidConfig", "detail": str(exc)},
            )
        return manager.session_info(session.id)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return manager.session_info(session_id)

    @app.post("/sessions/{session_id}/queries", status_code=202)
    def post_query(session_id: str, body: QueryBody):
        run_id = manager.post_query(session_id, body.query)
        return {"run_id": run_id}

    @app.get("/sessions/{session_id}/runs/{run_id}/stream")
    async def stream_run(session_id: str, run_id: str, request: Request):
        run = manager.get_run(session_id, run_id)
        position = 0
        resume = request.headers.get("last-event-id", "")
        if resume.isdigit():
            position = int(resume)

        async def generate():
            pos = position
            while True:
                batch = run.snapshot(after=pos)
                for event_id, name, data in batch:
                    yield _sse_frame(event_id, name, data)
                pos += len(batch)
                with run.lock:
                    finished = run.done and pos >= len(run.events)
                if finished:
                    return
                if await request.is_disconnected():
                    return
                await asyncio.sleep(STREAM_POLL_SECONDS)

        return StreamingResponse(
            generate(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-store"},
        )

    @app.get("/sessions/{session_id}/artifacts")
    def list_artifacts(session_id: str):
        return {"artifacts": manager.list_artifacts(session_id)}

    @app.get("/sessions/{session_id}/artifacts/{path:path}")
    def get_artifact(session_id: str, path: str):
        target = manager.artifact_path(session_id, path)
        media_type = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        return Response(content=target.read_bytes(), media_type=media_type)

    @app.post("/sessions/{session_id}/stop")
    def stop_session(session_id: str):
        return {"cancelling": manager.stop(session_id)}

    @app.delete("/sessions/{session_id}")
    def delete_session(session_id: str):
        manager.close(session_id)
        return {"id": session_id, "status": "closed"}

    return app


# module-level app so `uvicorn histoagent.service:app` works out of the box;
# configured entirely from HISTOAGENT_* environment variables
app = create_app(ServiceConfig.from_env())
