/** Scripted stand-in for the session service. Implements the same routes
 * and stream framing the client consumes, keeps per-run event logs so a
 * second client instance (a "page reload") replays exactly what the first
 * one saw live, and counts query posts so tests can prove the busy guard
 * never let a second submission through. */

import type {
  SessionConfig,
  SessionStatus,
  StepPayload,
  SummaryPayload,
} from "../src/contract.js";
import type { EventSourceLike, FetchLike, StreamMessage } from "../src/transport.js";

export interface ScriptedStep {
  thought: string;
  code: string;
  observation: string;
  operations_used?: number;
  is_final?: boolean;
  duration?: number;
}

interface RunRecord {
  id: string;
  events: Array<{ name: string; data: string }>;
  done: boolean;
  subscribers: Set<FakeEventSource>;
}

interface SessionRecord {
  id: string;
  status: SessionStatus;
  config: SessionConfig;
  created_at: number;
  runs: Map<string, RunRecord>;
  runOrder: string[];
  nextStepIndex: number;
  artifacts: Map<string, { contentType: string; body: string }>;
}

const DEFAULT_CONFIG: SessionConfig = {
  mode: "with_tools",
  max_steps: 200,
  reset_memory_after_query: false,
  tool_categories: null,
  observation_cap_bytes: 8192,
  adapter: "replay:conv.json",
};

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function errorBody(status: number, kind: string, detail: string): Response {
  return json(status, { error: kind, detail });
}

class FakeEventSource implements EventSourceLike {
  private handlers = new Map<string, Array<(event: StreamMessage) => void>>();
  private closed = false;
  private cursor = 0;

  constructor(private readonly run: RunRecord | null) {
    queueMicrotask(() => {
      if (this.run === null) {
        this.emit("error", "unknown run");
        return;
      }
      this.drain();
      if (!this.run.done && !this.closed) this.run.subscribers.add(this);
    });
  }

  addEventListener(type: string, listener: (event: StreamMessage) => void): void {
    const list = this.handlers.get(type) ?? [];
    list.push(listener);
    this.handlers.set(type, list);
  }

  close(): void {
    this.closed = true;
    this.run?.subscribers.delete(this);
  }

  private emit(name: string, data: string): void {
    for (const listener of this.handlers.get(name) ?? []) listener({ data });
  }

  drain(): void {
    if (this.closed || this.run === null) return;
    while (this.cursor < this.run.events.length) {
      const event = this.run.events[this.cursor]!;
      this.cursor += 1;
      this.emit(event.name, event.data);
      if (this.closed) return;
    }
  }
}

export interface FakeServiceOptions {
  /** One group of scripted steps per query, consumed in order. */
  script?: ScriptedStep[][];
  /** When true, runs stay open until emitStep/emitSummary are called. */
  manual?: boolean;
  /** Artifacts written when a run completes (path, contentType, body). */
  artifactsOnSummary?: Array<[string, string, string]>;
}

export class FakeService {
  readonly sessions = new Map<string, SessionRecord>();
  /** POST .../queries calls that reached the service, including refused ones. */
  queryPosts = 0;
  forceBusyOnce = false;
  networkDown = false;

  private readonly script: ScriptedStep[][];
  private scriptCursor = 0;
  private readonly manual: boolean;
  private readonly artifactsOnSummary: Array<[string, string, string]>;

  constructor(options: FakeServiceOptions = {}) {
    this.script = options.script ?? [];
    this.manual = options.manual ?? false;
    this.artifactsOnSummary = options.artifactsOnSummary ?? [];
  }

  readonly fetch: FetchLike = async (url, init) => {
    if (this.networkDown) throw new TypeError("fetch failed");
    const method = init?.method ?? "GET";
    const path = new URL(url).pathname;

    if (method === "POST" && path === "/sessions") {
      const overrides =
        init?.body !== undefined && init?.body !== null
          ? (JSON.parse(String(init.body)) as Partial<SessionConfig>)
          : {};
      return json(201, this.createSession(overrides));
    }

    const queries = /^\/sessions\/([^/]+)\/queries$/.exec(path);
    if (method === "POST" && queries !== null) {
      return this.postQuery(queries[1]!);
    }

    const artifactFile = /^\/sessions\/([^/]+)\/artifacts\/(.+)$/.exec(path);
    if (method === "GET" && artifactFile !== null) {
      const session = this.sessions.get(artifactFile[1]!);
      if (session === undefined) {
        return errorBody(404, "UnknownSession", "no such session");
      }
      const artifact = session.artifacts.get(decodeURIComponent(artifactFile[2]!));
      if (artifact === undefined) {
        return errorBody(404, "ArtifactNotFound", "no such artifact");
      }
      return new Response(artifact.body, {
        status: 200,
        headers: { "content-type": artifact.contentType },
      });
    }

    const artifacts = /^\/sessions\/([^/]+)\/artifacts$/.exec(path);
    if (method === "GET" && artifacts !== null) {
      const session = this.sessions.get(artifacts[1]!);
      if (session === undefined) {
        return errorBody(404, "UnknownSession", "no such session");
      }
      const listing = [...session.artifacts.entries()]
        .sort(([a], [b]) => (a < b ? -1 : 1))
        .map(([artifactPath, entry]) => ({
          path: artifactPath,
          size: new TextEncoder().encode(entry.body).length,
          modified: 1700000000.0,
        }));
      return json(200, { artifacts: listing });
    }

    const stop = /^\/sessions\/([^/]+)\/stop$/.exec(path);
    if (method === "POST" && stop !== null) {
      const session = this.sessions.get(stop[1]!);
      if (session === undefined) {
        return errorBody(404, "UnknownSession", "no such session");
      }
      return json(200, { cancelling: session.status === "running" });
    }

    const single = /^\/sessions\/([^/]+)$/.exec(path);
    if (single !== null) {
      const session = this.sessions.get(single[1]!);
      if (session === undefined) {
        return errorBody(404, "UnknownSession", "no such session");
      }
      if (method === "DELETE") {
        session.status = "closed";
        return json(200, { id: session.id, status: "closed" });
      }
      return json(200, this.sessionInfo(session));
    }

    return errorBody(404, "HttpError", `no route for ${method} ${path}`);
  };

  readonly eventSource = (url: string): EventSourceLike => {
    const match = /^\/sessions\/([^/]+)\/runs\/([^/]+)\/stream$/.exec(
      new URL(url).pathname,
    );
    const run =
      match === null
        ? null
        : (this.sessions.get(match[1]!)?.runs.get(match[2]!) ?? null);
    return new FakeEventSource(run);
  };

  private createSession(overrides: Partial<SessionConfig>): unknown {
    const id = `s${String(this.sessions.size + 1).padStart(4, "0")}`;
    const session: SessionRecord = {
      id,
      status: "idle",
      config: { ...DEFAULT_CONFIG, ...overrides },
      created_at: 1700000000.0,
      runs: new Map(),
      runOrder: [],
      nextStepIndex: 1,
      artifacts: new Map(),
    };
    this.sessions.set(id, session);
    return this.sessionInfo(session);
  }

  private sessionInfo(session: SessionRecord): unknown {
    return {
      id: session.id,
      status: session.status,
      config: session.config,
      created_at: session.created_at,
      runs: session.runOrder.map((runId) => {
        const run = session.runs.get(runId)!;
        return { id: run.id, finished: run.done, events: run.events.length };
      }),
    };
  }

  private postQuery(sessionId: string): Response {
    this.queryPosts += 1;
    const session = this.sessions.get(sessionId);
    if (session === undefined) {
      return errorBody(404, "UnknownSession", "no such session");
    }
    if (session.status === "closed") {
      return errorBody(409, "SessionClosed", "session is closed");
    }
    if (session.status === "running" || this.forceBusyOnce) {
      this.forceBusyOnce = false;
      return errorBody(409, "SessionBusy", "a query is already running");
    }
    const run: RunRecord = {
      id: `r${String(session.runOrder.length + 1).padStart(4, "0")}`,
      events: [],
      done: false,
      subscribers: new Set(),
    };
    session.runs.set(run.id, run);
    session.runOrder.push(run.id);
    session.status = "running";
    if (!this.manual) {
      const steps = this.script[this.scriptCursor] ?? [];
      this.scriptCursor += 1;
      for (const step of steps) this.appendStep(session, run, step);
      this.finishRun(session, run);
    }
    return json(202, { run_id: run.id });
  }

  private appendStep(
    session: SessionRecord,
    run: RunRecord,
    step: ScriptedStep,
  ): StepPayload {
    const payload: StepPayload = {
      index: session.nextStepIndex,
      thought: step.thought,
      code: step.code,
      observation: step.observation,
      operations_used: step.operations_used ?? 40 + session.nextStepIndex,
      is_final: step.is_final ?? false,
      duration: step.duration ?? 0.01,
    };
    session.nextStepIndex += 1;
    this.push(run, "step", JSON.stringify(payload));
    return payload;
  }

  private finishRun(
    session: SessionRecord,
    run: RunRecord,
    overrides: Partial<SummaryPayload> = {},
  ): void {
    const stepEvents = run.events.filter((event) => event.name === "step");
    const last =
      stepEvents.length > 0
        ? (JSON.parse(stepEvents[stepEvents.length - 1]!.data) as StepPayload)
        : null;
    const answered = last?.is_final ?? false;
    const summary: SummaryPayload = {
      query: "scripted query",
      steps: stepEvents.length,
      final_answer: answered ? (last?.observation ?? null) : null,
      answered,
      working_dir: "{workdir}",
      terminated_by: answered ? "final_answer" : "step_cap",
      total_duration: 0.05,
      cancelled: false,
      fatal_cause: null,
      ...overrides,
    };
    this.push(run, "summary", JSON.stringify(summary));
    run.done = true;
    session.status = session.status === "closed" ? "closed" : "idle";
    for (const [artifactPath, contentType, body] of this.artifactsOnSummary) {
      session.artifacts.set(artifactPath, { contentType, body });
    }
    for (const subscriber of [...run.subscribers]) run.subscribers.delete(subscriber);
  }

  private push(run: RunRecord, name: string, data: string): void {
    run.events.push({ name, data });
    for (const subscriber of [...run.subscribers]) subscriber.drain();
  }

  /* -- manual-mode controls ------------------------------------------- */

  private openRun(sessionId: string): [SessionRecord, RunRecord] {
    const session = this.sessions.get(sessionId);
    if (session === undefined) throw new Error(`no session ${sessionId}`);
    const runId = session.runOrder[session.runOrder.length - 1];
    if (runId === undefined) throw new Error("no run open");
    const run = session.runs.get(runId)!;
    if (run.done) throw new Error(`run ${runId} already finished`);
    return [session, run];
  }

  emitStep(sessionId: string, step: ScriptedStep): StepPayload {
    const [session, run] = this.openRun(sessionId);
    return this.appendStep(session, run, step);
  }

  emitSummary(sessionId: string, overrides: Partial<SummaryPayload> = {}): void {
    const [session, run] = this.openRun(sessionId);
    this.finishRun(session, run, overrides);
  }

  setArtifact(sessionId: string, path: string, contentType: string, body: string): void {
    const session = this.sessions.get(sessionId);
    if (session === undefined) throw new Error(`no session ${sessionId}`);
    session.artifacts.set(path, { contentType, body });
  }
}
