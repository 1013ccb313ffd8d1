/** Single store for the whole page. Every mutation goes through `dispatch`,
 * which applies the pure reducer and notifies subscribers, so concurrent
 * stream events and user actions serialize into one update order. Nothing
 * here is authoritative: all of it can be rebuilt from the service. */

import type {
  ArtifactEntry,
  SessionInfo,
  StepPayload,
  SummaryPayload,
} from "./contract.js";

export type ConnectionStatus =
  | "disconnected"
  | "connecting"
  | "idle"
  | "running"
  | "closed";

export type TraceEntry =
  | { kind: "step"; runId: string; step: StepPayload }
  | { kind: "summary"; runId: string; summary: SummaryPayload };

export interface PreviewState {
  path: string;
  contentType: string;
  /** Body text for previewable types; null means link-only (binary or image). */
  text: string | null;
}

export interface BannerState {
  message: string;
  retryable: boolean;
}

export interface State {
  serviceUrl: string | null;
  session: SessionInfo | null;
  status: ConnectionStatus;
  /** Run currently being followed live; summaries for other runs are replays. */
  liveRunId: string | null;
  trace: TraceEntry[];
  artifacts: ArtifactEntry[];
  banner: BannerState | null;
  busyNotice: string | null;
  preview: PreviewState | null;
}

export const initialState: State = {
  serviceUrl: null,
  session: null,
  status: "disconnected",
  liveRunId: null,
  trace: [],
  artifacts: [],
  banner: null,
  busyNotice: null,
  preview: null,
};

export type Action =
  | { type: "connect_started"; serviceUrl: string }
  | { type: "connect_failed"; message: string }
  | { type: "session_loaded"; session: SessionInfo }
  | { type: "trace_reset" }
  | { type: "step_received"; runId: string; step: StepPayload }
  | { type: "summary_received"; runId: string; summary: SummaryPayload }
  | { type: "query_submitted"; runId: string }
  | { type: "busy_notice"; message: string }
  | { type: "busy_cleared" }
  | { type: "artifacts_loaded"; artifacts: ArtifactEntry[] }
  | { type: "preview_loaded"; preview: PreviewState }
  | { type: "preview_closed" }
  | { type: "stream_failed"; message: string }
  | { type: "session_closed" };

export function reduce(state: State, action: Action): State {
  switch (action.type) {
    case "connect_started":
      return {
        ...initialState,
        serviceUrl: action.serviceUrl,
        status: "connecting",
      };
    case "connect_failed":
      return {
        ...state,
        status: "disconnected",
        session: null,
        banner: { message: action.message, retryable: true },
      };
    case "session_loaded":
      return {
        ...state,
        session: action.session,
        status: action.session.status,
        banner: null,
      };
    case "trace_reset":
      return { ...state, trace: [], liveRunId: null };
    case "step_received":
      return {
        ...state,
        trace: [
          ...state.trace,
          { kind: "step", runId: action.runId, step: action.step },
        ],
      };
    case "summary_received": {
      const trace: TraceEntry[] = [
        ...state.trace,
        { kind: "summary", runId: action.runId, summary: action.summary },
      ];
      if (state.liveRunId === action.runId) {
        const status = state.status === "closed" ? "closed" : "idle";
        // the run the notice complained about is over; drop it with the run
        return { ...state, trace, liveRunId: null, status, busyNotice: null };
      }
      return { ...state, trace };
    }
    case "query_submitted":
      return {
        ...state,
        status: "running",
        liveRunId: action.runId,
        busyNotice: null,
        banner: null,
      };
    case "busy_notice":
      return { ...state, busyNotice: action.message };
    case "busy_cleared":
      return { ...state, busyNotice: null };
    case "artifacts_loaded":
      return { ...state, artifacts: action.artifacts };
    case "preview_loaded":
      return { ...state, preview: action.preview };
    case "preview_closed":
      return { ...state, preview: null };
    case "stream_failed":
      return {
        ...state,
        liveRunId: null,
        status: state.status === "running" ? "idle" : state.status,
        banner: { message: action.message, retryable: false },
      };
    case "session_closed":
      return { ...state, status: "closed", liveRunId: null };
  }
}

export type Listener = (state: State) => void;

export class Store {
  private current: State;
  private listeners: Listener[] = [];

  constructor(start: State = initialState) {
    this.current = start;
  }

  get state(): State {
    return this.current;
  }

  dispatch(action: Action): void {
    this.current = reduce(this.current, action);
    for (const listener of this.listeners) listener(this.current);
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((entry) => entry !== listener);
    };
  }
}
