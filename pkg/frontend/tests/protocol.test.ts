import { describe, expect, it } from "vitest";

import { decodeServerMessage, encodePoseMessage } from "../src/protocol.js";

describe("pose message encoding", () => {
  it("round-trips the wire fields", () => {
    const text = encodePoseMessage({ seq: 3, t_ms: 12.5, q_deg: new Array(12).fill(1.5) });
    const parsed = JSON.parse(text);
    expect(parsed.seq).toBe(3);
    expect(parsed.t_ms).toBe(12.5);
    expect(parsed.q_deg).toHaveLength(12);
  });

  it("rejects wrong angle counts", () => {
    expect(() => encodePoseMessage({ seq: 1, t_ms: 0, q_deg: [1, 2, 3] })).toThrow(/12/);
  });

  it("rejects non-finite values", () => {
    const q = new Array(12).fill(0);
    q[4] = Number.NaN;
    expect(() => encodePoseMessage({ seq: 1, t_ms: 0, q_deg: q })).toThrow(/finite/);
  });
});

describe("server message decoding", () => {
  it("decodes a joint state", () => {
    const msg = decodeServerMessage(
      JSON.stringify({
        seq: 9,
        j_deg: [0, 70, 0, -90, 0, 0, -10],
        p_m: [0.1, 0.2, 0.9],
        quat: [1, 0, 0, 0],
        lat_ms: 1.25,
      }),
    );
    expect("error" in msg).toBe(false);
    if (!("error" in msg)) {
      expect(msg.seq).toBe(9);
      expect(msg.j_deg).toHaveLength(7);
    }
  });

  it("passes through error replies", () => {
    const msg = decodeServerMessage(JSON.stringify({ error: "bad message" }));
    expect(msg).toEqual({ error: "bad message" });
  });

  it("throws on malformed payloads", () => {
    expect(() => decodeServerMessage("{")).toThrow(/JSON/);
    expect(() => decodeServerMessage(JSON.stringify({ seq: 1 }))).toThrow(/malformed/);
  });
});
