// End-to-end console contract against the live service: spawns the backend
// with the shipped fixture checkpoints, connects like the console does,
// sweeps a slider, plays back the fixture trajectory, and checks the
// console-side forward kinematics against the service's replies and the
// offline evaluation path.

import { spawn, ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { ChainDescription, tipPosition } from "../src/fk.js";
import { parseTrajectoryFile, Player } from "../src/playback.js";
import { decodeServerMessage, encodePoseMessage, JointStateMessage } from "../src/protocol.js";

const here = dirname(fileURLToPath(import.meta.url));
const repoRoot = join(here, "..", "..");
const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;

let service: ChildProcess | null = null;

async function waitForHealth(timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/health`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error("service did not become healthy");
}

beforeAll(async () => {
  service = spawn(
    "python3",
    [
      "-m",
      "armteleop.cli",
      "serve",
      "--vae",
      join(repoRoot, "fixtures", "vae.json"),
      "--mapper",
      join(repoRoot, "fixtures", "mapper.json"),
      "--port",
      String(PORT),
    ],
    { cwd: repoRoot, stdio: "ignore", env: { ...process.env, PYTHONPATH: join(repoRoot, "src") } },
  );
  await waitForHealth();
}, 40_000);

afterAll(() => {
  service?.kill();
});

function openSession(): Promise<WebSocket> {
  return new Promise((resolve, reject) => {
    const ws = new WebSocket(`ws://127.0.0.1:${PORT}/ws`);
    ws.on("open", () => resolve(ws));
    ws.on("error", reject);
  });
}

function roundTrip(ws: WebSocket, seq: number, pose: number[]): Promise<JointStateMessage> {
  return new Promise((resolve, reject) => {
    ws.once("message", (data) => {
      const msg = decodeServerMessage(String(data));
      if ("error" in msg) reject(new Error(msg.error));
      else resolve(msg);
    });
    ws.send(encodePoseMessage({ seq, t_ms: seq * 25, q_deg: pose }));
  });
}

describe("console end to end", () => {
  it("fetches the chain description at connect", async () => {
    const chain = (await (await fetch(`${BASE}/chain`)).json()) as ChainDescription;
    expect(chain.links).toHaveLength(7);
    expect(chain.joint_limits_deg).toHaveLength(7);
  });

  it("slider sweep changes exactly the commanded motion", async () => {
    const chain = (await (await fetch(`${BASE}/chain`)).json()) as ChainDescription;
    const ws = await openSession();
    try {
      const rest = new Array(12).fill(0);
      const swept = [...rest];
      swept[3] = 40; // shoulder abduction slider
      const started = performance.now();
      const a = await roundTrip(ws, 1, rest);
      // the first reply lands within one 25 ms send period
      expect(performance.now() - started).toBeLessThan(25);
      const b = await roundTrip(ws, 2, swept);
      expect(a.seq).toBe(1);
      expect(b.seq).toBe(2);
      expect(a.j_deg).not.toEqual(b.j_deg);
      // console-side FK agrees with the service's own pose computation
      for (const reply of [a, b]) {
        const tip = tipPosition(chain, reply.j_deg);
        for (let i = 0; i < 3; i++) {
          expect(Math.abs(tip[i] - reply.p_m[i])).toBeLessThan(1e-9);
        }
      }
    } finally {
      ws.close();
    }
  });

  it("playback of the fixture reproduces the offline evaluation path to 1e-6 m", async () => {
    const chain = (await (await fetch(`${BASE}/chain`)).json()) as ChainDescription;
    const offline: { tip_path_m: number[][] } = JSON.parse(
      readFileSync(join(here, "..", "fixtures", "offline_path.json"), "utf-8"),
    );
    const frames = parseTrajectoryFile(
      readFileSync(join(here, "..", "fixtures", "operator.jsonl"), "utf-8"),
    );
    const player = new Player(frames);
    const ws = await openSession();
    try {
      let worst = 0;
      for (let k = 0; k < frames.length; k++) {
        player.seek(frames[k].t - frames[0].t);
        const pose = player.poseAt(player.cursor);
        const reply = await roundTrip(ws, k + 1, pose);
        const tip = tipPosition(chain, reply.j_deg);
        const ref = offline.tip_path_m[k];
        const err = Math.hypot(tip[0] - ref[0], tip[1] - ref[1], tip[2] - ref[2]);
        worst = Math.max(worst, err);
      }
      expect(worst).toBeLessThan(1e-6);
    } finally {
      ws.close();
    }
  }, 60_000);

  it("sequence numbering restarts per session and sessions are isolated", async () => {
    const first = await openSession();
    const second = await openSession();
    try {
      const a = await roundTrip(first, 1, new Array(12).fill(5));
      const b = await roundTrip(second, 1, new Array(12).fill(-5));
      expect(a.seq).toBe(1);
      expect(b.seq).toBe(1);
      expect(a.j_deg).not.toEqual(b.j_deg);
    } finally {
      first.close();
      second.close();
    }
  });
});
