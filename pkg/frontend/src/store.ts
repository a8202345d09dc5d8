import type {
  ActionInfo,
  CreateSessionResponse,
  ServerState,
  Side,
  SubmitReply,
} from "./types.js";

export type Phase = "idle" | "your_turn" | "awaiting_server" | "terminated";

export interface HistoryEntry {
  step: number;
  humanAction: number;
  modelAction: number;
  modelLabel: string;
  distance: number;
  mode: string;
  status: string;
  statusSide: Side | null;
}

/** Client-side session state.
 *
 * The store is a reducer over server responses: the simulation state it
 * exposes is always a verbatim server payload, never something computed
 * locally (no optimistic rendering). Its own contribution is turn gating,
 * which makes double-submits impossible by construction.
 */
export class SessionStore {
  phase: Phase = "idle";
  sessionId: string | null = null;
  humanSide: Side = "left";
  actions: ActionInfo[] = [];
  state: ServerState | null = null;
  history: HistoryEntry[] = [];
  lastReply: SubmitReply | null = null;
  lastError: string | null = null;

  canSubmit(): boolean {
    return this.phase === "your_turn";
  }

  sessionCreated(resp: CreateSessionResponse): void {
    this.sessionId = resp.session_id;
    this.humanSide = resp.human_side;
    this.actions = resp.actions;
    this.state = resp.state;
    this.history = [];
    this.lastReply = null;
    this.lastError = null;
    this.phase = resp.state.status === "running" ? "your_turn" : "terminated";
  }

  /** Gate check + lock. Throws instead of allowing a double submit. */
  submitStarted(): void {
    if (this.phase !== "your_turn") {
      throw new Error(`cannot submit while ${this.phase}`);
    }
    this.phase = "awaiting_server";
  }

  replyReceived(humanAction: number, reply: SubmitReply): void {
    if (this.phase !== "awaiting_server") {
      throw new Error(`unexpected reply while ${this.phase}`);
    }
    this.state = reply.state; // server state adopted verbatim
    this.lastReply = reply;
    this.history.push({
      step: reply.record.step,
      humanAction,
      modelAction: reply.model_action,
      modelLabel: reply.model_action_label,
      distance: reply.state.distance,
      mode: reply.record.mode,
      status: reply.record.status,
      statusSide: reply.record.status_side,
    });
    this.phase = reply.state.status === "running" ? "your_turn" : "terminated";
  }

  submitFailed(message: string): void {
    if (this.phase === "awaiting_server") this.phase = "your_turn";
    this.lastError = message;
  }

  /** Banner text for a terminated session, null while running. */
  banner(): string | null {
    if (!this.state || this.state.status === "running") return null;
    const side = this.state.status_side ? ` (${this.state.status_side})` : "";
    return `${this.state.status}${side}`;
  }

  /** Palette view-model: one button per action, disabled unless it is
   * the human's turn. */
  paletteItems(): { action: ActionInfo; enabled: boolean }[] {
    const enabled = this.canSubmit();
    return this.actions.map((action) => ({ action, enabled }));
  }
}
