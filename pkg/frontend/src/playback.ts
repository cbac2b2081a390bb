// Playback of recorded human pose trajectories (one JSON object per line:
// {"t": seconds, "q_deg": [12 angles]}).  The player resolves the pose for
// any wall-clock position, supports pause and scrubbing, and never stops the
// outgoing stream: while paused the last pose is held.

export interface TrajectoryFrame {
  t: number;
  q_deg: number[];
}

export class PlaybackError extends Error {}

export function parseTrajectoryFile(text: string): TrajectoryFrame[] {
  const frames: TrajectoryFrame[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    let raw: unknown;
    try {
      raw = JSON.parse(line);
    } catch {
      throw new PlaybackError(`line ${i + 1}: invalid JSON`);
    }
    const rec = raw as Record<string, unknown>;
    const t = rec.t;
    const q = rec.q_deg;
    if (typeof t !== "number" || !Number.isFinite(t)) {
      throw new PlaybackError(`line ${i + 1}: missing numeric t`);
    }
    if (!Array.isArray(q) || q.length !== 12 || !q.every((v) => typeof v === "number" && Number.isFinite(v))) {
      throw new PlaybackError(`line ${i + 1}: q_deg must hold 12 finite angles`);
    }
    if (frames.length > 0 && t <= frames[frames.length - 1].t) {
      throw new PlaybackError(`line ${i + 1}: timestamps must increase`);
    }
    frames.push({ t, q_deg: q as number[] });
  }
  return frames;
}

export class Player {
  readonly frames: TrajectoryFrame[];
  private playing = false;
  private cursorS = 0; // position within the recording, seconds
  private lastTickMs: number | null = null;

  constructor(frames: TrajectoryFrame[]) {
    this.frames = frames;
  }

  get empty(): boolean {
    return this.frames.length === 0;
  }

  get duration(): number {
    return this.empty ? 0 : this.frames[this.frames.length - 1].t - this.frames[0].t;
  }

  get cursor(): number {
    return this.cursorS;
  }

  get isPlaying(): boolean {
    return this.playing;
  }

  play(nowMs: number): void {
    this.playing = true;
    this.lastTickMs = nowMs;
  }

  pause(): void {
    this.playing = false;
    this.lastTickMs = null;
  }

  /** Jump to a position in seconds (scrubber). */
  seek(positionS: number): void {
    this.cursorS = Math.min(Math.max(positionS, 0), this.duration);
  }

  /** Advance by wall-clock time; returns the pose to stream right now. */
  tick(nowMs: number): number[] | null {
    if (this.empty) {
      return null;
    }
    if (this.playing && this.lastTickMs !== null) {
      this.cursorS = Math.min(this.cursorS + (nowMs - this.lastTickMs) / 1e3, this.duration);
      this.lastTickMs = nowMs;
      if (this.cursorS >= this.duration) {
        this.pause(); // hold the final pose; the stream keeps going
      }
    }
    return this.poseAt(this.cursorS);
  }

  /** Pose at a recording position, held between frames (no interpolation of
   * authoritative recorded values). */
  poseAt(positionS: number): number[] {
    const t0 = this.frames[0].t;
    const target = t0 + Math.min(Math.max(positionS, 0), this.duration);
    let lo = 0;
    let hi = this.frames.length - 1;
    while (lo < hi) {
      const mid = (lo + hi + 1) >> 1;
      if (this.frames[mid].t <= target) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    return this.frames[lo].q_deg;
  }
}
