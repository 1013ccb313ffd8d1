/** Application logic between the service client and the store. No DOM
 * access here; app.ts owns the document, tests drive this directly.
 *
 * Two rules the controller enforces rather than the server:
 * the page never posts a query while one is running (the server would 409
 * anyway, but the guard keeps the submit path single-flight), and each open
 * run view holds exactly one stream subscription, released on summary. */

import type { SessionOverrides, StreamEvent, SummaryPayload } from "./contract.js";
import { ServiceClient, ServiceError } from "./transport.js";
import { Store } from "./store.js";
import { previewKind } from "./render.js";

export type ConnectTarget = "new" | { sessionId: string };

export class SessionController {
  private lastTarget: ConnectTarget | null = null;
  private lastOverrides: SessionOverrides | undefined;
  private tail: Promise<void> = Promise.resolve();

  constructor(
    private readonly client: ServiceClient,
    readonly store: Store,
  ) {}

  get sessionId(): string | null {
    return this.store.state.session?.id ?? null;
  }

  artifactHref(path: string): string {
    const sessionId = this.sessionId;
    if (sessionId === null) return "#";
    return this.client.artifactUrl(sessionId, path);
  }

  /** Resolves once any live run being followed has finished. */
  settled(): Promise<void> {
    return this.tail;
  }

  /** Connect to the service: create a session or attach to an existing one.
   * Attaching replays every recorded run in order, so the trace after a
   * reload is rebuilt purely from what the service stored. */
  async connect(target: ConnectTarget, overrides?: SessionOverrides): Promise<void> {
    this.lastTarget = target;
    this.lastOverrides = overrides;
    this.store.dispatch({
      type: "connect_started",
      serviceUrl: this.client.baseUrl,
    });
    let session;
    try {
      session =
        target === "new"
          ? await this.client.createSession(overrides)
          : await this.client.getSession(target.sessionId);
    } catch (error) {
      this.store.dispatch({
        type: "connect_failed",
        message: describe(error, "could not reach the session service"),
      });
      return;
    }
    this.store.dispatch({ type: "session_loaded", session });
    this.store.dispatch({ type: "trace_reset" });
    for (const run of session.runs) {
      if (run.finished) {
        await this.replay(session.id, run.id);
      } else {
        // attached mid-run: follow the open stream live
        this.store.dispatch({ type: "query_submitted", runId: run.id });
        this.tail = this.watch(session.id, run.id);
      }
    }
    await this.refreshArtifacts();
  }

  retry(): Promise<void> {
    if (this.lastTarget === null) return Promise.resolve();
    return this.connect(this.lastTarget, this.lastOverrides);
  }

  private dispatchEvent(runId: string, event: StreamEvent): void {
    if (event.kind === "step") {
      this.store.dispatch({ type: "step_received", runId, step: event.payload });
    } else {
      this.store.dispatch({ type: "summary_received", runId, summary: event.payload });
    }
  }

  private async replay(sessionId: string, runId: string): Promise<void> {
    try {
      await this.client.streamRun(sessionId, runId, (event) =>
        this.dispatchEvent(runId, event),
      );
    } catch (error) {
      this.store.dispatch({
        type: "stream_failed",
        message: describe(error, `stream for ${runId} failed`),
      });
    }
  }

  private async watch(sessionId: string, runId: string): Promise<void> {
    await this.replay(sessionId, runId);
    await this.refreshArtifacts();
  }

  /** Submit a query. Returns the run summary, or null when the submission
   * was refused (still running, closed, or rejected by the server). The
   * promise resolves only after the run's stream has delivered its summary
   * and the artifact listing has been refreshed. */
  async submitQuery(query: string): Promise<SummaryPayload | null> {
    const state = this.store.state;
    if (state.session === null) {
      this.store.dispatch({ type: "busy_notice", message: "not connected" });
      return null;
    }
    if (state.status !== "idle") {
      // client-side guard: never post while a run is open or the session closed
      this.store.dispatch({
        type: "busy_notice",
        message:
          state.status === "running"
            ? "a query is already running; wait for the summary"
            : `session is ${state.status}; cannot submit`,
      });
      return null;
    }
    const sessionId = state.session.id;
    let runId: string;
    try {
      runId = await this.client.postQuery(sessionId, query);
    } catch (error) {
      if (error instanceof ServiceError && error.kind === "SessionBusy") {
        this.store.dispatch({ type: "busy_notice", message: error.message });
      } else if (error instanceof ServiceError && error.kind === "SessionClosed") {
        this.store.dispatch({ type: "session_closed" });
        this.store.dispatch({ type: "busy_notice", message: error.message });
      } else {
        this.store.dispatch({
          type: "connect_failed",
          message: describe(error, "query submission failed"),
        });
      }
      return null;
    }
    this.store.dispatch({ type: "query_submitted", runId });
    let summary: SummaryPayload | null = null;
    const done = (async () => {
      try {
        summary = await this.client.streamRun(sessionId, runId, (event) =>
          this.dispatchEvent(runId, event),
        );
      } catch (error) {
        this.store.dispatch({
          type: "stream_failed",
          message: describe(error, `stream for ${runId} failed`),
        });
      }
      await this.refreshArtifacts();
    })();
    this.tail = done;
    await done;
    return summary;
  }

  async refreshArtifacts(): Promise<void> {
    const sessionId = this.sessionId;
    if (sessionId === null) return;
    try {
      const artifacts = await this.client.listArtifacts(sessionId);
      this.store.dispatch({ type: "artifacts_loaded", artifacts });
    } catch {
      // listing is advisory; stale panel beats a spurious error banner
    }
  }

  async openPreview(path: string): Promise<void> {
    const sessionId = this.sessionId;
    if (sessionId === null) return;
    const kind = previewKind(path);
    if (kind !== "text") {
      this.store.dispatch({
        type: "preview_loaded",
        preview: { path, contentType: "", text: null },
      });
      return;
    }
    try {
      const content = await this.client.fetchArtifact(sessionId, path);
      this.store.dispatch({
        type: "preview_loaded",
        preview: { path, contentType: content.contentType, text: content.text },
      });
    } catch (error) {
      this.store.dispatch({
        type: "busy_notice",
        message: describe(error, `could not load ${path}`),
      });
    }
  }

  closePreview(): void {
    this.store.dispatch({ type: "preview_closed" });
  }

  async stop(): Promise<void> {
    const sessionId = this.sessionId;
    if (sessionId === null) return;
    try {
      await this.client.stop(sessionId);
    } catch (error) {
      this.store.dispatch({
        type: "busy_notice",
        message: describe(error, "stop request failed"),
      });
    }
  }
}

function describe(error: unknown, fallback: string): string {
  if (error instanceof ServiceError) return `${error.kind}: ${error.message}`;
  if (error instanceof Error && error.message.length > 0) return error.message;
  return fallback;
}
