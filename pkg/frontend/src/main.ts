import { ApiClient, ApiError } from "./api.js";
import { paint } from "./canvas.js";
import { ReplayCursor, parseTranscript } from "./replay.js";
import { SessionStore } from "./store.js";
import { renderStrip, type StripState, type Viewport } from "./strip.js";
import type { ServerState } from "./types.js";

const api = new ApiClient("");
const store = new SessionStore();

const canvas = document.getElementById("strip") as HTMLCanvasElement;
const paletteEl = document.getElementById("palette")!;
const historyEl = document.getElementById("history")!;
const statusEl = document.getElementById("status-line")!;
const errorEl = document.getElementById("error-line")!;
const distributionEl = document.getElementById("distribution")!;
const newSessionBtn = document.getElementById("new-session") as HTMLButtonElement;
const sideSelect = document.getElementById("side-select") as HTMLSelectElement;
const downloadBtn = document.getElementById("download") as HTMLButtonElement;
const replayInput = document.getElementById("replay-file") as HTMLInputElement;
const replayPrev = document.getElementById("replay-prev") as HTMLButtonElement;
const replayNext = document.getElementById("replay-next") as HTMLButtonElement;
const replayInfo = document.getElementById("replay-info")!;

const viewport: Viewport = { width: canvas.width, height: canvas.height, margin: 40 };
let replay: ReplayCursor | null = null;

function stripStateOf(state: ServerState): StripState {
  return {
    left_x: state.left_x,
    right_x: state.right_x,
    distance: state.distance,
    mode: state.mode,
    status: state.status,
    status_side: state.status_side,
    step: state.step,
  };
}

function draw(state: StripState): void {
  const ctx = canvas.getContext("2d");
  if (ctx) paint(ctx, renderStrip(state, viewport));
}

function renderPalette(): void {
  paletteEl.replaceChildren();
  for (const { action, enabled } of store.paletteItems()) {
    const btn = document.createElement("button");
    btn.textContent = `${action.id} ${action.label}`;
    btn.disabled = !enabled;
    btn.className = action.finishing ? "action finishing" : "action";
    btn.addEventListener("click", () => void submit(action.id));
    paletteEl.appendChild(btn);
  }
}

function renderHistory(): void {
  historyEl.replaceChildren();
  for (const entry of store.history) {
    const li = document.createElement("li");
    const label = store.actions[entry.humanAction]?.label ?? String(entry.humanAction);
    li.textContent =
      `#${entry.step} you: ${label} / model: ${entry.modelLabel} ` +
      `(d=${entry.distance.toFixed(2)} m, ${entry.mode})`;
    historyEl.appendChild(li);
  }
}

function renderStatus(): void {
  if (!store.state) {
    statusEl.textContent = "no session";
    return;
  }
  const banner = store.banner();
  statusEl.textContent = banner
    ? `ended: ${banner}`
    : `step ${store.state.step}, distance ${store.state.distance.toFixed(2)} m, ${store.state.mode}`;
  errorEl.textContent = store.lastError ?? "";
  const dist = store.lastReply?.model_distribution;
  if (dist) {
    const top = dist
      .map((p, id) => ({ p, id }))
      .sort((a, b) => b.p - a.p)
      .slice(0, 5)
      .map(({ p, id }) => `${store.actions[id]?.label ?? id}: ${(p * 100).toFixed(1)}%`)
      .join("  ");
    distributionEl.textContent = `model was drawing from: ${top}`;
  } else {
    distributionEl.textContent = "";
  }
}

function renderAll(): void {
  if (store.state) draw(stripStateOf(store.state));
  renderPalette();
  renderHistory();
  renderStatus();
}

async function submit(action: number): Promise<void> {
  if (!store.canSubmit() || !store.sessionId || !store.state) return;
  const expected = store.state.step;
  store.submitStarted();
  renderPalette();
  try {
    const reply = await api.submitAction(store.sessionId, action, expected);
    store.replyReceived(action, reply);
  } catch (err) {
    store.submitFailed(err instanceof ApiError ? err.detail : String(err));
  }
  renderAll();
}

async function newSession(): Promise<void> {
  try {
    const resp = await api.createSession({
      human_side: sideSelect.value === "right" ? "right" : "left",
    });
    store.sessionCreated(resp);
    replay = null;
    replayInfo.textContent = "";
  } catch (err) {
    store.lastError = err instanceof ApiError ? err.detail : String(err);
  }
  renderAll();
}

async function download(): Promise<void> {
  if (!store.sessionId) return;
  const text = await api.downloadTranscript(store.sessionId);
  const blob = new Blob([text], { type: "application/x-ndjson" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = `touch_${store.sessionId}.jsonl`;
  a.click();
  URL.revokeObjectURL(a.href);
}

function renderReplay(): void {
  if (!replay) return;
  draw(replay.current());
  replayInfo.textContent = `replay ${replay.index}/${replay.length}`;
}

replayInput.addEventListener("change", () => {
  const file = replayInput.files?.[0];
  if (!file) return;
  void file.text().then((text) => {
    try {
      replay = new ReplayCursor(parseTranscript(text));
      renderReplay();
    } catch (err) {
      errorEl.textContent = String(err);
    }
  });
});
replayPrev.addEventListener("click", () => {
  replay?.prev();
  renderReplay();
});
replayNext.addEventListener("click", () => {
  replay?.next();
  renderReplay();
});
newSessionBtn.addEventListener("click", () => void newSession());
downloadBtn.addEventListener("click", () => void download());

renderAll();
