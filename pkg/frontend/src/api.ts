import type {
  ActionInfo,
  CreateSessionRequest,
  CreateSessionResponse,
  SessionSnapshot,
  SubmitReply,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed wrapper over the service endpoints. No caching, no retries:
 * every call is one request and the response is handed back verbatim. */
export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = (await resp.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  info(): Promise<{ service: string; ready: boolean; n_actions: number | null }> {
    return this.request("/");
  }

  async listActions(): Promise<ActionInfo[]> {
    const body = await this.request<{ actions: ActionInfo[] }>("/list-actions");
    return body.actions;
  }

  createSession(req: CreateSessionRequest = {}): Promise<CreateSessionResponse> {
    return this.request("/create-session", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  submitAction(
    sessionId: string,
    action: number,
    expectedStep: number,
  ): Promise<SubmitReply> {
    return this.request(`/sessions/${sessionId}/submit-action`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ action, expected_step: expectedStep }),
    });
  }

  getSnapshot(sessionId: string): Promise<SessionSnapshot> {
    return this.request(`/sessions/${sessionId}/state`);
  }

  async downloadTranscript(sessionId: string): Promise<string> {
    const resp = await this.fetchFn(`${this.base}/sessions/${sessionId}/transcript`);
    if (!resp.ok) throw new ApiError(resp.status, resp.statusText);
    return resp.text();
  }
}
