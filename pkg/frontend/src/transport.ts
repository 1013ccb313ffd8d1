/** HTTP and stream access to the session service.
 *
 * Both the fetch function and the event-source constructor are injected so
 * tests can script the service without a network. Only the subset of the
 * EventSource surface we rely on is required of the fake.
 */

import type {
  ArtifactEntry,
  ServiceErrorBody,
  SessionInfo,
  SessionOverrides,
  StepPayload,
  StreamEvent,
  SummaryPayload,
} from "./contract.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface StreamMessage {
  data: string;
}

export interface EventSourceLike {
  addEventListener(type: string, listener: (event: StreamMessage) => void): void;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

/** Error raised for any non-2xx service response. `kind` carries the wire
 * error name (SessionBusy, PathEscape, ...) when the body has one. */
export class ServiceError extends Error {
  constructor(
    readonly kind: string,
    detail: string,
    readonly status: number,
  ) {
    super(detail);
    this.name = "ServiceError";
  }
}

export interface ArtifactContent {
  contentType: string;
  text: string;
}

export class ServiceClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike,
    private readonly eventSourceFactory: EventSourceFactory,
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.url(path), init);
    if (!response.ok) {
      let body: Partial<ServiceErrorBody> = {};
      try {
        body = (await response.json()) as Partial<ServiceErrorBody>;
      } catch {
        // non-JSON error body; fall through to the status line
      }
      throw new ServiceError(
        body.error ?? "HttpError",
        body.detail ?? `request failed with status ${response.status}`,
        response.status,
      );
    }
    return (await response.json()) as T;
  }

  createSession(overrides?: SessionOverrides): Promise<SessionInfo> {
    return this.request<SessionInfo>("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(overrides ?? {}),
    });
  }

  getSession(sessionId: string): Promise<SessionInfo> {
    return this.request<SessionInfo>(`/sessions/${sessionId}`);
  }

  async postQuery(sessionId: string, query: string): Promise<string> {
    const body = await this.request<{ run_id: string }>(
      `/sessions/${sessionId}/queries`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ query }),
      },
    );
    return body.run_id;
  }

  async listArtifacts(sessionId: string): Promise<ArtifactEntry[]> {
    const body = await this.request<{ artifacts: ArtifactEntry[] }>(
      `/sessions/${sessionId}/artifacts`,
    );
    return body.artifacts;
  }

  artifactUrl(sessionId: string, path: string): string {
    const encoded = path.split("/").map(encodeURIComponent).join("/");
    return this.url(`/sessions/${sessionId}/artifacts/${encoded}`);
  }

  /** Fetch an artifact body as text. Callers should only use this for
   * previewable types; binaries go through `artifactUrl` links instead. */
  async fetchArtifact(sessionId: string, path: string): Promise<ArtifactContent> {
    const response = await this.fetchImpl(this.artifactUrl(sessionId, path));
    if (!response.ok) {
      let body: Partial<ServiceErrorBody> = {};
      try {
        body = (await response.json()) as Partial<ServiceErrorBody>;
      } catch {
        // ignore
      }
      throw new ServiceError(
        body.error ?? "HttpError",
        body.detail ?? `artifact fetch failed with status ${response.status}`,
        response.status,
      );
    }
    const contentType = response.headers.get("content-type") ?? "application/octet-stream";
    return { contentType, text: await response.text() };
  }

  stop(sessionId: string): Promise<{ cancelling: boolean }> {
    return this.request(`/sessions/${sessionId}/stop`, { method: "POST" });
  }

  closeSession(sessionId: string): Promise<{ id: string; status: string }> {
    return this.request(`/sessions/${sessionId}`, { method: "DELETE" });
  }

  /** Subscribe to a run's event stream. Every step and the final summary are
   * handed to `onEvent` in arrival order; the promise resolves with the
   * summary once the stream completes, after which the source is closed.
   * One subscription per open run view; the caller owns nothing else. */
  streamRun(
    sessionId: string,
    runId: string,
    onEvent: (event: StreamEvent) => void,
  ): Promise<SummaryPayload> {
    const source = this.eventSourceFactory(
      this.url(`/sessions/${sessionId}/runs/${runId}/stream`),
    );
    return new Promise<SummaryPayload>((resolve, reject) => {
      let settled = false;
      source.addEventListener("step", (event) => {
        if (settled) return;
        const payload = JSON.parse(event.data) as StepPayload;
        onEvent({ kind: "step", payload });
      });
      source.addEventListener("summary", (event) => {
        if (settled) return;
        settled = true;
        const payload = JSON.parse(event.data) as SummaryPayload;
        onEvent({ kind: "summary", payload });
        source.close();
        resolve(payload);
      });
      source.addEventListener("error", (event) => {
        if (settled) return;
        settled = true;
        source.close();
        const detail =
          typeof event.data === "string" && event.data.length > 0
            ? event.data
            : "event stream interrupted";
        reject(new ServiceError("StreamError", detail, 0));
      });
    });
  }
}
