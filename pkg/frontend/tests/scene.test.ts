import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { ChainDescription } from "../src/fk.js";
import { buildScene, defaultCamera, project } from "../src/scene.js";

const here = dirname(fileURLToPath(import.meta.url));
const chain: ChainDescription = JSON.parse(
  readFileSync(join(here, "..", "fixtures", "chain.json"), "utf-8"),
);

describe("projection", () => {
  it("orthographic projection preserves depth ordering on screen x", () => {
    const camera = { ...defaultCamera(), perspective: false, yawRad: 0, pitchRad: 0 };
    const a = project(camera, [0.1, 0, 0]);
    const b = project(camera, [0.2, 0, 0]);
    expect(b[0]).toBeGreaterThan(a[0]);
  });

  it("perspective shrinks points farther from the camera", () => {
    const camera = { ...defaultCamera(), perspective: true, yawRad: 0, pitchRad: 0 };
    const near = project(camera, [0.3, 0.5, 0]);
    const far = project(camera, [0.3, -0.5, 0]);
    expect(Math.abs(far[0])).toBeLessThan(Math.abs(near[0]));
  });
});

describe("scene geometry", () => {
  const zero = [0, 0, 0, 0, 0, 0, 0];

  it("skeleton has one polyline vertex per frame", () => {
    const geometry = buildScene(defaultCamera(), chain, zero, []);
    expect(geometry.skeleton).toHaveLength(8);
    expect(geometry.tip).not.toBeNull();
  });

  it("no joint angles means an empty skeleton", () => {
    const geometry = buildScene(defaultCamera(), chain, null, [[0, 0, 0.5]]);
    expect(geometry.skeleton).toHaveLength(0);
    expect(geometry.tip).toBeNull();
    expect(geometry.trace).toHaveLength(1);
  });

  it("sweeping one joint moves exactly one link subtree", () => {
    // wrist bent (J6 nonzero) so the tool tip sits off the J5 roll axis
    const camera = defaultCamera();
    const rest = buildScene(camera, chain, [10, 70, 0, -90, 0, -30, -10], []);
    const moved = buildScene(camera, chain, [10, 70, 0, -90, 40, -30, -10], []);
    // frames up to and including joint 5's origin are unchanged
    for (let i = 0; i <= 5; i++) {
      expect(moved.skeleton[i]).toEqual(rest.skeleton[i]);
    }
    const delta = Math.hypot(
      moved.skeleton[7][0] - rest.skeleton[7][0],
      moved.skeleton[7][1] - rest.skeleton[7][1],
    );
    expect(delta).toBeGreaterThan(0);
  });

  it("rebuilds fast enough for 40 Hz updates with a full trace", () => {
    const trace = Array.from({ length: 600 }, (_, i) => [0.001 * i, 0, 0.5]);
    const started = performance.now();
    for (let i = 0; i < 1000; i++) {
      buildScene(defaultCamera(), chain, zero, trace);
    }
    const perFrameMs = (performance.now() - started) / 1000;
    // a 30 fps budget leaves 33 ms per frame; geometry must be a tiny slice
    expect(perFrameMs).toBeLessThan(5);
  });
});
