// Wire types for the bout service. These mirror the server's JSON payloads
// exactly; the client never invents fields of its own.

export type Side = "left" | "right";

export type PriorityMode = "M-M" | "P-NP" | "NP-P";

export type SimStatus =
  | "running"
  | "out_of_bounds"
  | "crash"
  | "touch_registered"
  | "terminal_action"
  | "max_steps";

export interface ServerState {
  left_x: number;
  right_x: number;
  distance: number;
  mode: PriorityMode;
  step: number;
  status: SimStatus;
  status_side: Side | null;
  mode_just_changed: boolean;
  last_left: number | null;
  last_right: number | null;
}

export interface ActionInfo {
  id: number;
  label: string;
  finishing: boolean;
}

export interface CreateSessionRequest {
  seed?: number;
  human_side?: Side;
  start_left?: number;
  start_right?: number;
  max_steps?: number;
}

export interface CreateSessionResponse {
  session_id: string;
  seed: number;
  human_side: Side;
  state: ServerState;
  actions: ActionInfo[];
}

// Step summary inside a submit reply (no positions; the new state carries them).
export interface SubmitRecord {
  step: number;
  left_action: number;
  right_action: number;
  left_disp: number;
  right_disp: number;
  left_light: boolean;
  right_light: boolean;
  left_finishing: boolean;
  right_finishing: boolean;
  mode: PriorityMode;
  mode_changed: boolean;
  status: SimStatus;
  status_side: Side | null;
}

export interface SubmitReply {
  model_action: number;
  model_action_label: string;
  state: ServerState;
  record: SubmitRecord;
  model_distribution?: number[];
}

// Row shape of GET /sessions/{id}/state "steps".
export interface HistoryRow {
  step: number;
  left_action: number;
  right_action: number;
  left_x: number;
  right_x: number;
  distance: number;
  mode: PriorityMode;
  status: SimStatus;
  status_side: Side | null;
}

export interface SessionSnapshot {
  session_id: string;
  seed: number;
  human_side: Side;
  state: ServerState;
  steps: HistoryRow[];
}

// Transcript file lines (JSONL): header then one full step record per line.
export interface TranscriptConfig {
  tau_crash: number;
  touch_distance: number;
  strip_length: number;
  start_left: number;
  start_right: number;
  max_steps: number;
  seed: number;
  delta: number;
}

export interface TranscriptHeader {
  schema_version: number;
  kind: "transcript";
  config: TranscriptConfig;
  left_policy: string;
  right_policy: string;
  final_status: SimStatus;
  final_side: Side | null;
  truncated: boolean;
  skills_hash: string | null;
  strategy_hash: string | null;
  n_steps: number;
  steps_sha256: string;
}

export interface TranscriptStep extends SubmitRecord {
  left_x: number;
  right_x: number;
  distance: number;
  left_clip?: { bout_id: string; start_frame: number } | null;
  right_clip?: { bout_id: string; start_frame: number } | null;
}

export interface Transcript {
  header: TranscriptHeader;
  steps: TranscriptStep[];
}
