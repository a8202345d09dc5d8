import type { Transcript, TranscriptHeader, TranscriptStep } from "./types.js";
import type { StripState } from "./strip.js";

/** Parse a downloaded transcript file (JSONL: header line then one line
 * per step). Validates the header kind and the advertised step count so a
 * truncated download is caught before replay. */
export function parseTranscript(text: string): Transcript {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) throw new Error("empty transcript");
  let header: TranscriptHeader;
  try {
    header = JSON.parse(lines[0]!) as TranscriptHeader;
  } catch {
    throw new Error("transcript header is not valid JSON");
  }
  if (header.kind !== "transcript") {
    throw new Error(`expected a transcript file, got kind ${JSON.stringify(header.kind)}`);
  }
  const steps = lines.slice(1).map((line, i) => {
    try {
      return JSON.parse(line) as TranscriptStep;
    } catch {
      throw new Error(`step line ${i + 1} is not valid JSON`);
    }
  });
  if (steps.length !== header.n_steps) {
    throw new Error(`header promises ${header.n_steps} steps, file has ${steps.length}`);
  }
  return { header, steps };
}

/** Frame-by-frame cursor over a transcript.
 *
 * Position 0 is the en-garde state before any step; position i shows the
 * state after step i. Every state shown is reconstructed from recorded
 * fields only.
 */
export class ReplayCursor {
  private position = 0;

  constructor(readonly transcript: Transcript) {}

  get index(): number {
    return this.position;
  }

  get length(): number {
    return this.transcript.steps.length;
  }

  atStart(): boolean {
    return this.position === 0;
  }

  atEnd(): boolean {
    return this.position === this.length;
  }

  next(): StripState {
    if (!this.atEnd()) this.position += 1;
    return this.current();
  }

  prev(): StripState {
    if (!this.atStart()) this.position -= 1;
    return this.current();
  }

  current(): StripState {
    const { config } = this.transcript.header;
    if (this.position === 0) {
      return {
        left_x: config.start_left,
        right_x: config.start_right,
        distance: config.start_right - config.start_left,
        mode: "M-M",
        status: "running",
        status_side: null,
        step: 0,
      };
    }
    const step = this.transcript.steps[this.position - 1]!;
    return {
      left_x: step.left_x,
      right_x: step.right_x,
      distance: step.distance,
      mode: step.mode,
      status: step.status,
      status_side: step.status_side,
      step: step.step,
    };
  }
}
