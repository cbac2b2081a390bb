"""Real-time teleoperation service: WebSocket pose streaming plus health.

Each incoming message carries a sequence number, client timestamp and 12
human joint angles; the reply echoes the sequence number with the decoded 7
robot joint angles (limit-clamped), the end-effector pose and the server
processing latency.  Sessions are independent; checkpoints are loaded once
and only read afterwards, so any number of sessions can run concurrently.

Backpressure policy is freshest-pose-wins: when a client outpaces the
server, queued stale poses are discarded (and counted) in favor of the
newest one.  Out-of-order sequence numbers are dropped and counted.
"""

from __future__ import annotations

import asyncio
import json
import math
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from anyio import to_thread
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .kinematics import JointConfiguration, KinematicChain, forward_kinematics, unit_decode, unit_encode
from .mapper import PoseMapper
from .vae import TrajectoryVAE


@dataclass
class ServiceMetrics:
    started_at: float = field(default_factory=time.monotonic)
    active_sessions: int = 0
    total_sessions: int = 0
    messages_processed: int = 0
    backpressure_drops: int = 0
    out_of_order_drops: int = 0
    malformed_messages: int = 0
    latencies_ms: deque = field(default_factory=lambda: deque(maxlen=4096))

    def percentile(self, q: float) -> float:
        if not self.latencies_ms:
            return 0.0
        return float(np.percentile(np.asarray(self.latencies_ms), q))


class TeleopEngine:
    """The pure per-message pipeline: pose in, clamped joint state out."""

    def __init__(
        self,
        vae: TrajectoryVAE,
        mapper: PoseMapper,
        chain: KinematicChain,
        joint_limits_deg: np.ndarray,
    ):
        self.vae = vae
        self.mapper = mapper
        self.chain = chain
        self.joint_limits_deg = np.asarray(joint_limits_deg, dtype=np.float64)

    def joint_state(self, q_deg: np.ndarray) -> dict:
        encoded = unit_encode(np.asarray(q_deg, dtype=np.float64))[None, :]
        latent = self.mapper.predict(encoded)
        segment = self.vae.decode(latent)[0]
        angles = unit_decode(segment[1])  # the predicted next frame
        angles = np.clip(angles, self.joint_limits_deg[:, 0], self.joint_limits_deg[:, 1])
        pose = forward_kinematics(self.chain, JointConfiguration(angles))
        return {
            "j_deg": angles.tolist(),
            "p_m": pose.position_m.tolist(),
            "quat": pose.quaternion.tolist(),
        }


def parse_pose_message(text: str) -> tuple[int, float, np.ndarray]:
    """Validate one wire message; raises ValueError with a reason."""
    try:
        msg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(msg, dict):
        raise ValueError("message must be an object")
    try:
        seq = int(msg["seq"])
        t_ms = float(msg["t_ms"])
        q = msg["q_deg"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError("message needs integer seq, numeric t_ms and q_deg[12]") from exc
    if not isinstance(q, list) or len(q) != 12:
        raise ValueError(f"q_deg must have 12 angles, got {len(q) if isinstance(q, list) else type(q).__name__}")
    q_arr = np.asarray(q, dtype=np.float64)
    if not np.all(np.isfinite(q_arr)) or not math.isfinite(t_ms):
        raise ValueError("angles and t_ms must be finite")
    return seq, t_ms, q_arr


def create_app(
    vae: TrajectoryVAE,
    mapper: PoseMapper,
    chain: KinematicChain,
    joint_limits_deg: np.ndarray,
    human_range_deg: np.ndarray | None = None,
    vae_hash: str = "",
    mapper_hash: str = "",
    latency_window: int = 4096,
) -> FastAPI:
    engine = TeleopEngine(vae, mapper, chain, joint_limits_deg)
    metrics = ServiceMetrics(latencies_ms=deque(maxlen=latency_window))
    app = FastAPI(title="armteleop service")
    app.state.engine = engine
    app.state.metrics = metrics

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "uptime_s": time.monotonic() - metrics.started_at,
            "active_sessions": metrics.active_sessions,
            "total_sessions": metrics.total_sessions,
            "messages_processed": metrics.messages_processed,
            "backpressure_drops": metrics.backpressure_drops,
            "out_of_order_drops": metrics.out_of_order_drops,
            "malformed_messages": metrics.malformed_messages,
            "latency_p50_ms": metrics.percentile(50),
            "latency_p99_ms": metrics.percentile(99),
            "vae_checkpoint_hash": vae_hash,
            "mapper_checkpoint_hash": mapper_hash,
        }

    @app.get("/chain")
    def chain_parameters() -> dict:
        return {
            "links": [
                {
                    "d_m": link.d_m,
                    "a_m": link.a_m,
                    "alpha_rad": link.alpha_rad,
                    "theta_offset_rad": link.theta_offset_rad,
                }
                for link in chain.links
            ],
            "base_position_m": chain.base_position_m.tolist(),
            "base_quaternion": chain.base_quaternion.tolist(),
            "joint_limits_deg": np.asarray(joint_limits_deg).tolist(),
            "human_range_deg": (
                np.asarray(human_range_deg).tolist() if human_range_deg is not None else None
            ),
        }

    @app.websocket("/ws")
    async def teleop_session(ws: WebSocket) -> None:
        await ws.accept()
        metrics.active_sessions += 1
        metrics.total_sessions += 1
        freshest: asyncio.Queue = asyncio.Queue(maxsize=1)

        async def reader() -> None:
            try:
                while True:
                    text = await ws.receive_text()
                    if freshest.full():
                        freshest.get_nowait()
                        metrics.backpressure_drops += 1
                    freshest.put_nowait(text)
            except WebSocketDisconnect:
                pass
            finally:
                if freshest.full():
                    freshest.get_nowait()
                    metrics.backpressure_drops += 1
                freshest.put_nowait(None)

        reader_task = asyncio.create_task(reader())
        last_seq = None
        try:
            while True:
                text = await freshest.get()
                if text is None:
                    break
                started = time.perf_counter()
                try:
                    seq, _t_ms, q_deg = parse_pose_message(text)
                except ValueError as exc:
                    metrics.malformed_messages += 1
                    await ws.send_text(json.dumps({"error": str(exc)}))
                    continue
                if last_seq is not None and seq <= last_seq:
                    metrics.out_of_order_drops += 1
                    continue
                last_seq = seq
                # inference runs off the event loop so slow processing never
                # blocks the reader (that is what makes freshest-pose-wins work)
                state = await to_thread.run_sync(app.state.engine.joint_state, q_deg)
                lat_ms = (time.perf_counter() - started) * 1e3
                metrics.messages_processed += 1
                metrics.latencies_ms.append(lat_ms)
                state["seq"] = seq
                state["lat_ms"] = lat_ms
                await ws.send_text(json.dumps(state))
        except WebSocketDisconnect:
            pass
        finally:
            reader_task.cancel()
            metrics.active_sessions -= 1

    return app


def load_app_from_checkpoints(
    vae_path,
    mapper_path,
    chain: KinematicChain,
    joint_limits_deg: np.ndarray,
    human_range_deg: np.ndarray | None = None,
    latency_window: int = 4096,
) -> FastAPI:
    vae = TrajectoryVAE.from_checkpoint(vae_path)
    mapper = PoseMapper.from_checkpoint(mapper_path)
    return create_app(
        vae,
        mapper,
        chain,
        joint_limits_deg,
        human_range_deg=human_range_deg,
        vae_hash=vae.params_digest(),
        mapper_hash=mapper.params_digest(),
        latency_window=latency_window,
    )


def serve(app: FastAPI, host: str, port: int) -> None:
    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="info")
