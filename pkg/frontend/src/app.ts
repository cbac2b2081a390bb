// Operator console wiring: sliders, playback, the live canvas and telemetry.

import { TeleopSession, SEND_PERIOD_MS } from "./client.js";
import { ChainDescription } from "./fk.js";
import { parseTrajectoryFile, PlaybackError, Player } from "./playback.js";
import {
  applyReply,
  initialState,
  latencyStats,
  manualOverrideActive,
  setSlider,
} from "./state.js";
import { buildScene, defaultCamera, drawScene } from "./scene.js";

const HUMAN_JOINT_LABELS = [
  "T4 abduction",
  "T4 rotation",
  "T4 flexion",
  "shoulder abduction",
  "shoulder rotation",
  "shoulder flexion",
  "elbow deviation",
  "elbow pronation",
  "elbow flexion",
  "wrist deviation",
  "wrist pronation",
  "wrist flexion",
];

const state = initialState();
const camera = defaultCamera();
let chain: ChainDescription | null = null;
let player: Player | null = null;
let session: TeleopSession | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function serviceBase(): string {
  const input = el<HTMLInputElement>("service-address");
  return input.value.replace(/\/+$/, "");
}

function wsUrl(): string {
  return serviceBase().replace(/^http/, "ws") + "/ws";
}

function setStatus(text: string, cls: string): void {
  const badge = el<HTMLSpanElement>("status");
  badge.textContent = text;
  badge.className = `badge ${cls}`;
}

function currentPose(): number[] {
  // manual slider input wins over playback within one send period
  if (player && !manualOverrideActive(state, performance.now())) {
    const pose = player.tick(performance.now());
    if (pose) {
      updateScrubber();
      for (let i = 0; i < 12; i++) {
        state.sliders[i] = pose[i];
      }
      refreshSliderPositions();
      return pose;
    }
  }
  return [...state.sliders];
}

function connect(): void {
  session?.disconnect();
  fetch(serviceBase() + "/chain")
    .then((response) => response.json())
    .then((doc: ChainDescription) => {
      chain = doc;
      buildSliders(doc);
      session = new TeleopSession(wsUrl(), currentPose, {
        onReply: (reply) => {
          applyReply(state, reply);
          renderTelemetry(reply);
        },
        onError: (message) => {
          el<HTMLDivElement>("errors").textContent = message;
        },
        onStatus: (status) => {
          state.status = status;
          setStatus(status, status);
        },
      });
      session.connect();
    })
    .catch(() => {
      setStatus("disconnected", "disconnected");
      el<HTMLDivElement>("errors").textContent = "service unreachable";
    });
}

function buildSliders(doc: ChainDescription): void {
  const box = el<HTMLDivElement>("sliders");
  box.innerHTML = "";
  for (let i = 0; i < 12; i++) {
    const range = doc.human_range_deg ? doc.human_range_deg[i] : [-180, 180];
    const row = document.createElement("label");
    row.className = "slider-row";
    const name = document.createElement("span");
    name.textContent = HUMAN_JOINT_LABELS[i];
    const input = document.createElement("input");
    input.type = "range";
    input.min = String(range[0]);
    input.max = String(range[1]);
    input.step = "0.5";
    input.value = String(state.sliders[i]);
    input.dataset.index = String(i);
    const value = document.createElement("span");
    value.className = "slider-value";
    value.textContent = `${state.sliders[i].toFixed(1)}`;
    input.addEventListener("input", () => {
      const idx = Number(input.dataset.index);
      setSlider(state, idx, Number(input.value), performance.now(), SEND_PERIOD_MS, doc.human_range_deg);
      value.textContent = Number(input.value).toFixed(1);
    });
    row.append(name, input, value);
    box.append(row);
  }
}

function refreshSliderPositions(): void {
  const inputs = document.querySelectorAll<HTMLInputElement>("#sliders input");
  inputs.forEach((input) => {
    const idx = Number(input.dataset.index);
    input.value = String(state.sliders[idx]);
    const label = input.nextElementSibling as HTMLSpanElement | null;
    if (label) label.textContent = state.sliders[idx].toFixed(1);
  });
}

function renderTelemetry(reply: { j_deg: number[]; lat_ms: number; seq: number }): void {
  el<HTMLDivElement>("joints").textContent = reply.j_deg
    .map((v, i) => `J${i + 1} ${v.toFixed(1)}°`)
    .join("  ");
  const stats = latencyStats(state);
  el<HTMLDivElement>("latency").textContent =
    `seq ${reply.seq}  lat ${reply.lat_ms.toFixed(1)} ms  p50 ${stats.p50.toFixed(1)}  p99 ${stats.p99.toFixed(1)}`;
  drawLatencyChart();
}

function drawLatencyChart(): void {
  const canvas = el<HTMLCanvasElement>("latency-chart");
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#6fb36f";
  ctx.beginPath();
  const buffer = state.latencyBuffer;
  const n = buffer.length;
  const peak = Math.max(5, ...buffer);
  for (let i = 0; i < n; i++) {
    const x = (i / Math.max(1, n - 1)) * canvas.width;
    const y = canvas.height - (buffer[i] / peak) * (canvas.height - 4) - 2;
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  }
  ctx.stroke();
}

function renderLoop(): void {
  const canvas = el<HTMLCanvasElement>("arm-canvas");
  const ctx = canvas.getContext("2d");
  if (ctx && chain) {
    const angles = state.lastReply ? state.lastReply.j_deg : null;
    const geometry = buildScene(camera, chain, angles, state.pathTrace);
    drawScene(ctx, canvas.width, canvas.height, geometry);
  }
  requestAnimationFrame(renderLoop);
}

function updateScrubber(): void {
  if (!player) return;
  const scrub = el<HTMLInputElement>("scrubber");
  scrub.max = String(player.duration);
  scrub.value = String(player.cursor);
  el<HTMLSpanElement>("playback-pos").textContent =
    `${player.cursor.toFixed(2)} / ${player.duration.toFixed(2)} s`;
}

function wirePlayback(): void {
  el<HTMLInputElement>("trajectory-file").addEventListener("change", (event) => {
    const input = event.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    file.text().then((text) => {
      try {
        const frames = parseTrajectoryFile(text);
        if (frames.length === 0) {
          el<HTMLDivElement>("errors").textContent = "trajectory file is empty; nothing to play";
          player = null;
          return;
        }
        player = new Player(frames);
        el<HTMLDivElement>("errors").textContent = "";
        updateScrubber();
      } catch (exc) {
        player = null;
        el<HTMLDivElement>("errors").textContent =
          exc instanceof PlaybackError ? exc.message : String(exc);
      }
    });
  });
  el<HTMLButtonElement>("play").addEventListener("click", () => player?.play(performance.now()));
  el<HTMLButtonElement>("pause").addEventListener("click", () => player?.pause());
  el<HTMLInputElement>("scrubber").addEventListener("input", (event) => {
    player?.seek(Number((event.target as HTMLInputElement).value));
  });
}

export function start(): void {
  el<HTMLButtonElement>("connect").addEventListener("click", connect);
  el<HTMLButtonElement>("projection").addEventListener("click", () => {
    camera.perspective = !camera.perspective;
    el<HTMLButtonElement>("projection").textContent = camera.perspective
      ? "perspective"
      : "orthographic";
  });
  const canvas = el<HTMLCanvasElement>("arm-canvas");
  let dragging = false;
  canvas.addEventListener("mousedown", () => (dragging = true));
  window.addEventListener("mouseup", () => (dragging = false));
  window.addEventListener("mousemove", (event) => {
    if (dragging) {
      camera.yawRad += event.movementX * 0.01;
      camera.pitchRad = Math.min(1.4, Math.max(-0.4, camera.pitchRad + event.movementY * 0.01));
    }
  });
  wirePlayback();
  renderLoop();
}

start();
