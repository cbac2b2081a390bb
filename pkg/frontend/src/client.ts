// WebSocket session against the teleoperation service: a fixed 40 Hz send
// loop streaming whatever pose the pose source currently resolves, sequence
// numbers restarting from 1 on every (re)connect.

import { decodeServerMessage, encodePoseMessage, JointStateMessage } from "./protocol.js";

export const SEND_PERIOD_MS = 25; // 40 Hz

export interface SessionCallbacks {
  onReply(reply: JointStateMessage): void;
  onError(message: string): void;
  onStatus(status: "disconnected" | "connecting" | "connected"): void;
}

export type PoseSource = () => number[]; // 12 angles, degrees

export class TeleopSession {
  private ws: WebSocket | null = null;
  private timer: ReturnType<typeof setInterval> | null = null;
  private seq = 0;
  private readonly url: string;
  private readonly poseSource: PoseSource;
  private readonly callbacks: SessionCallbacks;

  constructor(url: string, poseSource: PoseSource, callbacks: SessionCallbacks) {
    this.url = url;
    this.poseSource = poseSource;
    this.callbacks = callbacks;
  }

  connect(): void {
    this.disconnect();
    this.callbacks.onStatus("connecting");
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.seq = 0; // numbering restarts per session
      this.callbacks.onStatus("connected");
      this.timer = setInterval(() => this.sendCurrentPose(), SEND_PERIOD_MS);
    };
    ws.onmessage = (event) => {
      try {
        const msg = decodeServerMessage(String(event.data));
        if ("error" in msg) {
          this.callbacks.onError(msg.error);
        } else {
          this.callbacks.onReply(msg);
        }
      } catch (exc) {
        this.callbacks.onError(String(exc));
      }
    };
    ws.onclose = () => {
      this.stopLoop();
      this.callbacks.onStatus("disconnected");
    };
    ws.onerror = () => {
      this.callbacks.onError("connection error");
    };
  }

  private sendCurrentPose(): void {
    if (!this.ws || this.ws.readyState !== WebSocket.OPEN) {
      return;
    }
    this.seq += 1;
    const text = encodePoseMessage({
      seq: this.seq,
      t_ms: performance.now(),
      q_deg: this.poseSource(),
    });
    this.ws.send(text);
  }

  private stopLoop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  disconnect(): void {
    this.stopLoop();
    if (this.ws) {
      this.ws.onclose = null;
      this.ws.close();
      this.ws = null;
    }
    this.callbacks.onStatus("disconnected");
  }

  get sequence(): number {
    return this.seq;
  }
}
