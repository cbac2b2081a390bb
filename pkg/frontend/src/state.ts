// Console state: connection, sliders, the last authoritative joint state,
// bounded telemetry buffers.  Displayed values always come from the most
// recent reply; the client never smooths what the server said.

import { JointStateMessage } from "./protocol.js";

export type ConnectionStatus = "disconnected" | "connecting" | "connected";

export interface ConsoleState {
  status: ConnectionStatus;
  sliders: number[]; // 12 human joint angles, degrees
  lastReply: JointStateMessage | null;
  latencyBuffer: number[]; // rolling lat_ms values, drop-oldest
  pathTrace: number[][]; // recent end-effector positions, drop-oldest
  latencyCapacity: number;
  traceCapacity: number;
  manualOverrideUntil: number; // timestamp (ms): slider input wins until then
}

export function initialState(
  latencyCapacity = 256,
  traceCapacity = 600,
): ConsoleState {
  return {
    status: "disconnected",
    sliders: new Array(12).fill(0),
    lastReply: null,
    latencyBuffer: [],
    pathTrace: [],
    latencyCapacity,
    traceCapacity,
    manualOverrideUntil: 0,
  };
}

export function clampToRange(value: number, range: number[]): number {
  return Math.min(Math.max(value, range[0]), range[1]);
}

export function setSlider(
  state: ConsoleState,
  index: number,
  valueDeg: number,
  nowMs: number,
  overrideWindowMs: number,
  humanRange: number[][] | null,
): void {
  if (index < 0 || index >= state.sliders.length) {
    throw new Error(`slider index ${index} out of range`);
  }
  const range = humanRange ? humanRange[index] : [-180, 180];
  state.sliders[index] = clampToRange(valueDeg, range);
  state.manualOverrideUntil = nowMs + overrideWindowMs;
}

export function manualOverrideActive(state: ConsoleState, nowMs: number): boolean {
  return nowMs < state.manualOverrideUntil;
}

export function applyReply(state: ConsoleState, reply: JointStateMessage): void {
  state.lastReply = reply;
  state.latencyBuffer.push(reply.lat_ms);
  if (state.latencyBuffer.length > state.latencyCapacity) {
    state.latencyBuffer.splice(0, state.latencyBuffer.length - state.latencyCapacity);
  }
  state.pathTrace.push([reply.p_m[0], reply.p_m[1], reply.p_m[2]]);
  if (state.pathTrace.length > state.traceCapacity) {
    state.pathTrace.splice(0, state.pathTrace.length - state.traceCapacity);
  }
}

export function latencyStats(state: ConsoleState): { p50: number; p99: number } {
  if (state.latencyBuffer.length === 0) {
    return { p50: 0, p99: 0 };
  }
  const sorted = [...state.latencyBuffer].sort((a, b) => a - b);
  const pick = (q: number) =>
    sorted[Math.min(sorted.length - 1, Math.floor((q / 100) * sorted.length))];
  return { p50: pick(50), p99: pick(99) };
}
