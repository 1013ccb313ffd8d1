/** Wire types for the session service. Field names match the JSON payloads
 * exactly, so everything stays snake_case on this boundary. */

export interface StepPayload {
  index: number;
  thought: string;
  code: string;
  observation: string;
  operations_used: number;
  is_final: boolean;
  duration: number;
}

export interface SummaryPayload {
  query: string;
  steps: number;
  final_answer: unknown;
  answered: boolean;
  working_dir: string;
  terminated_by: string;
  total_duration: number;
  cancelled: boolean;
  fatal_cause: string | null;
}

export interface SessionConfig {
  mode: string;
  max_steps: number;
  reset_memory_after_query: boolean;
  tool_categories: string[] | null;
  observation_cap_bytes: number;
  adapter: string;
}

export interface RunIndexEntry {
  id: string;
  finished: boolean;
  events: number;
}

export type SessionStatus = "idle" | "running" | "closed";

export interface SessionInfo {
  id: string;
  status: SessionStatus;
  config: SessionConfig;
  created_at: number;
  runs: RunIndexEntry[];
}

export interface ArtifactEntry {
  path: string;
  size: number;
  modified: number;
}

export interface ServiceErrorBody {
  error: string;
  detail: string;
}

export type StreamEvent =
  | { kind: "step"; payload: StepPayload }
  | { kind: "summary"; payload: SummaryPayload };

/** Overrides accepted by POST /sessions. All optional; the server fills the rest. */
export interface SessionOverrides {
  adapter?: string;
  mode?: string;
  max_steps?: number;
  reset_memory_after_query?: boolean;
  tool_categories?: string[];
  observation_cap_bytes?: number;
}
