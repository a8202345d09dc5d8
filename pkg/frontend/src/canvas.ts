import type { DrawCommand } from "./strip.js";

/** Execute a draw-command list on a 2D canvas context. Kept trivially thin
 * so everything interesting stays in the testable renderer. */
export function paint(ctx: CanvasRenderingContext2D, commands: DrawCommand[]): void {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  ctx.font = "12px system-ui, sans-serif";
  for (const cmd of commands) {
    switch (cmd.kind) {
      case "rect":
        ctx.fillStyle = cmd.fill;
        ctx.fillRect(cmd.x, cmd.y, cmd.w, cmd.h);
        break;
      case "line":
        ctx.strokeStyle = cmd.stroke;
        ctx.lineWidth = cmd.width;
        ctx.beginPath();
        ctx.moveTo(cmd.x1, cmd.y1);
        ctx.lineTo(cmd.x2, cmd.y2);
        ctx.stroke();
        break;
      case "circle":
        ctx.fillStyle = cmd.fill;
        ctx.beginPath();
        ctx.arc(cmd.cx, cmd.cy, cmd.r, 0, Math.PI * 2);
        ctx.fill();
        break;
      case "text":
        ctx.fillStyle = cmd.fill;
        ctx.textAlign = cmd.align;
        ctx.fillText(cmd.text, cmd.x, cmd.y);
        break;
    }
  }
}
