// 3-D line-segment rendering of the arm: no meshes, just the kinematic
// skeleton, the end-effector marker and the recent tip path, projected onto
// the canvas with a small orbit camera (orthographic or perspective).

import { ChainDescription, jointPositions } from "./fk.js";

export interface Camera {
  yawRad: number;
  pitchRad: number;
  distanceM: number;
  perspective: boolean;
  scalePx: number; // pixels per meter at the focal plane
}

export function defaultCamera(): Camera {
  return { yawRad: 0.8, pitchRad: 0.35, distanceM: 3.0, perspective: true, scalePx: 420 };
}

/** World-space point -> [x_px, y_px, depth]; origin at canvas center. */
export function project(camera: Camera, point: number[]): number[] {
  const cy = Math.cos(camera.yawRad);
  const sy = Math.sin(camera.yawRad);
  const cp = Math.cos(camera.pitchRad);
  const sp = Math.sin(camera.pitchRad);
  // orbit the camera about the world z-up axis
  const x1 = cy * point[0] + sy * point[1];
  const y1 = -sy * point[0] + cy * point[1];
  const z1 = point[2];
  const y2 = cp * y1 + sp * z1;
  const z2 = -sp * y1 + cp * z1;
  const depth = camera.distanceM - y2;
  let k = camera.scalePx;
  if (camera.perspective) {
    k = (camera.scalePx * camera.distanceM) / Math.max(depth, 1e-3);
  }
  return [x1 * k, -z2 * k, depth];
}

export interface SceneGeometry {
  skeleton: number[][]; // projected joint chain, base to tip
  trace: number[][]; // projected recent tip path
  tip: number[] | null;
}

export function buildScene(
  camera: Camera,
  chain: ChainDescription,
  jointAnglesDeg: number[] | null,
  pathTrace: number[][],
): SceneGeometry {
  const skeleton =
    jointAnglesDeg === null
      ? []
      : jointPositions(chain, jointAnglesDeg).map((p) => project(camera, p));
  return {
    skeleton,
    trace: pathTrace.map((p) => project(camera, p)),
    tip: skeleton.length > 0 ? skeleton[skeleton.length - 1] : null,
  };
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  widthPx: number,
  heightPx: number,
  geometry: SceneGeometry,
): void {
  ctx.clearRect(0, 0, widthPx, heightPx);
  const ox = widthPx / 2;
  const oy = heightPx * 0.62;

  ctx.strokeStyle = "#2b5c8a";
  ctx.lineWidth = 1;
  ctx.beginPath();
  for (let i = 0; i < geometry.trace.length; i++) {
    const [x, y] = geometry.trace[i];
    if (i === 0) ctx.moveTo(ox + x, oy + y);
    else ctx.lineTo(ox + x, oy + y);
  }
  ctx.stroke();

  ctx.strokeStyle = "#e8eef5";
  ctx.lineWidth = 3;
  ctx.beginPath();
  for (let i = 0; i < geometry.skeleton.length; i++) {
    const [x, y] = geometry.skeleton[i];
    if (i === 0) ctx.moveTo(ox + x, oy + y);
    else ctx.lineTo(ox + x, oy + y);
  }
  ctx.stroke();

  ctx.fillStyle = "#9fb6cc";
  for (const [x, y] of geometry.skeleton) {
    ctx.beginPath();
    ctx.arc(ox + x, oy + y, 3.5, 0, 2 * Math.PI);
    ctx.fill();
  }

  if (geometry.tip) {
    ctx.fillStyle = "#ffb454";
    ctx.beginPath();
    ctx.arc(ox + geometry.tip[0], oy + geometry.tip[1], 6, 0, 2 * Math.PI);
    ctx.fill();
  }
}
