// Wire protocol of the teleoperation service: single-line JSON messages over
// a WebSocket, 12 human joint angles out, 7 robot joint angles plus the
// end-effector pose back.

export interface PoseMessage {
  seq: number;
  t_ms: number;
  q_deg: number[]; // 12 human joint angles, degrees
}

export interface JointStateMessage {
  seq: number;
  j_deg: number[]; // 7 robot joint angles, degrees
  p_m: number[]; // end-effector position, meters
  quat: number[]; // unit quaternion (w, x, y, z)
  lat_ms: number; // server processing latency
}

export interface ErrorMessage {
  error: string;
}

export function encodePoseMessage(msg: PoseMessage): string {
  if (msg.q_deg.length !== 12) {
    throw new Error(`pose message needs 12 angles, got ${msg.q_deg.length}`);
  }
  if (!msg.q_deg.every(Number.isFinite) || !Number.isFinite(msg.t_ms)) {
    throw new Error("pose message fields must be finite");
  }
  return JSON.stringify({ seq: msg.seq, t_ms: msg.t_ms, q_deg: msg.q_deg });
}

export function decodeServerMessage(text: string): JointStateMessage | ErrorMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    throw new Error("server sent invalid JSON");
  }
  if (typeof raw !== "object" || raw === null) {
    throw new Error("server message must be an object");
  }
  const msg = raw as Record<string, unknown>;
  if (typeof msg.error === "string") {
    return { error: msg.error };
  }
  const j = msg.j_deg;
  const p = msg.p_m;
  const q = msg.quat;
  if (
    typeof msg.seq !== "number" ||
    !Array.isArray(j) || j.length !== 7 ||
    !Array.isArray(p) || p.length !== 3 ||
    !Array.isArray(q) || q.length !== 4 ||
    typeof msg.lat_ms !== "number"
  ) {
    throw new Error("malformed joint state message");
  }
  return {
    seq: msg.seq,
    j_deg: j as number[],
    p_m: p as number[],
    quat: q as number[],
    lat_ms: msg.lat_ms,
  };
}
