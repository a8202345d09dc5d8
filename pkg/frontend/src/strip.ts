import type { PriorityMode, Side, SimStatus } from "./types.js";

// Strip geometry in meters.
export const STRIP_LENGTH = 14;
export const LINE_POSITIONS: Record<string, number> = {
  left_warning: 2,
  left_en_garde: 5,
  middle: 7,
  right_en_garde: 9,
  right_warning: 12,
};

export interface StripState {
  left_x: number;
  right_x: number;
  distance: number;
  mode: PriorityMode;
  status: SimStatus;
  status_side: Side | null;
  step: number;
}

export interface Viewport {
  width: number;
  height: number;
  margin: number; // horizontal inset on each side, pixels
}

export type DrawCommand =
  | { kind: "rect"; tag: string; x: number; y: number; w: number; h: number; fill: string }
  | { kind: "line"; tag: string; x1: number; y1: number; x2: number; y2: number; stroke: string; width: number }
  | { kind: "circle"; tag: string; cx: number; cy: number; r: number; fill: string }
  | { kind: "text"; tag: string; x: number; y: number; text: string; fill: string; align: "left" | "center" | "right" };

/** Linear meters-to-pixels map: 0 m at the left margin, 14 m at the right.
 * Symmetric margins put the 7 m middle line at the canvas midpoint. */
export function stripX(meters: number, vp: Viewport): number {
  return vp.margin + (meters / STRIP_LENGTH) * (vp.width - 2 * vp.margin);
}

function clampToStrip(x: number): { x: number; out: boolean } {
  if (x < 0) return { x: 0, out: true };
  if (x > STRIP_LENGTH) return { x: STRIP_LENGTH, out: true };
  return { x, out: false };
}

function priorityText(mode: PriorityMode): string {
  // modes are stored from the left fencer's perspective
  if (mode === "P-NP") return "priority: left";
  if (mode === "NP-P") return "priority: right";
  return "priority: none";
}

/** Render one state to an ordered draw-command list.
 *
 * Pure data in, pure data out: the command list is the unit under golden
 * snapshot tests, and a separate painter executes it on a canvas.
 */
export function renderStrip(state: StripState, vp: Viewport): DrawCommand[] {
  const cmds: DrawCommand[] = [];
  const top = vp.height * 0.3;
  const bottom = vp.height * 0.7;
  const mid = (top + bottom) / 2;

  cmds.push({
    kind: "rect",
    tag: "strip",
    x: stripX(0, vp),
    y: top,
    w: stripX(STRIP_LENGTH, vp) - stripX(0, vp),
    h: bottom - top,
    fill: "#d8cde0",
  });

  for (const [name, meters] of Object.entries(LINE_POSITIONS)) {
    const x = stripX(meters, vp);
    cmds.push({
      kind: "line",
      tag: `line:${name}`,
      x1: x,
      y1: top,
      x2: x,
      y2: bottom,
      stroke: name === "middle" ? "#7a6a8a" : "#a898b8",
      width: name === "middle" ? 2 : 1,
    });
    cmds.push({
      kind: "text",
      tag: `label:${name}`,
      x,
      y: bottom + 14,
      text: `${meters}m`,
      fill: "#8a7a9a",
      align: "center",
    });
  }

  // distance indicator between the fencers (drawn before them)
  const leftPos = clampToStrip(state.left_x);
  const rightPos = clampToStrip(state.right_x);
  const lx = stripX(leftPos.x, vp);
  const rx = stripX(rightPos.x, vp);
  cmds.push({
    kind: "line",
    tag: "distance:line",
    x1: lx,
    y1: mid,
    x2: rx,
    y2: mid,
    stroke: "#b0a0c0",
    width: 1,
  });
  cmds.push({
    kind: "text",
    tag: "distance:value",
    x: (lx + rx) / 2,
    y: mid - 8,
    text: `${state.distance.toFixed(2)} m`,
    fill: "#5a4a6a",
    align: "center",
  });

  cmds.push({
    kind: "circle",
    tag: "fencer:left",
    cx: lx,
    cy: mid,
    r: 9,
    fill: "#3a6ea5",
  });
  cmds.push({
    kind: "circle",
    tag: "fencer:right",
    cx: rx,
    cy: mid,
    r: 9,
    fill: "#a53a3a",
  });
  if (leftPos.out) {
    cmds.push({
      kind: "text",
      tag: "oob:left",
      x: lx,
      y: mid - 16,
      text: "OUT",
      fill: "#a53a3a",
      align: "center",
    });
  }
  if (rightPos.out) {
    cmds.push({
      kind: "text",
      tag: "oob:right",
      x: rx,
      y: mid - 16,
      text: "OUT",
      fill: "#a53a3a",
      align: "center",
    });
  }

  cmds.push({
    kind: "text",
    tag: "mode",
    x: stripX(7, vp),
    y: top - 12,
    text: priorityText(state.mode),
    fill: "#5a4a6a",
    align: "center",
  });

  if (state.status !== "running") {
    const side = state.status_side ? ` (${state.status_side})` : "";
    cmds.push({
      kind: "rect",
      tag: "banner:back",
      x: stripX(0, vp),
      y: 4,
      w: stripX(STRIP_LENGTH, vp) - stripX(0, vp),
      h: 22,
      fill: "#f2e8c8",
    });
    cmds.push({
      kind: "text",
      tag: "banner:text",
      x: stripX(7, vp),
      y: 19,
      text: `${state.status}${side} after step ${state.step}`,
      fill: "#6a5a2a",
      align: "center",
    });
  }

  return cmds;
}
