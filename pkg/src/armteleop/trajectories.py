"""Dataset construction: trajectory generation, resampling, windowing, pairing.

The robot-side pipeline replaces an external motion planner with joint-space
minimum-jerk interpolation between uniformly sampled limit-respecting
configurations.  The human-side pipeline synthesizes single-joint and
multi-joint arm actions, drives them through the retargeting rules, and pairs
the 40 Hz human stream with latent encodings of the matching robot windows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from . import records
from .kinematics import (
    DEFAULT_JOINT_LIMITS_DEG,
    Q1_SHOULDER_ABDUCTION,
    Q2_SHOULDER_FLEXION,
    Q3_SHOULDER_ROTATION,
    Q4_ELBOW_FLEXION,
    Q5_FOREARM_PRONATION,
    Q6_WRIST_DEVIATION,
    Q7_WRIST_FLEXION,
    HumanArmPose,
    JointConfiguration,
    retarget_trajectory,
    unit_decode,
    unit_encode,
)
from .validation import InvalidInputError, as_float_array, require_finite

VAE_FRAME_DT_S = 0.1  # 10 Hz robot sampling for VAE segments
PAIR_DT_S = 0.025  # 40 Hz human/robot pairing rate
# A VAE window spans 0.1 s; on the 40 Hz pairing grid that is 4 samples.
WINDOW_STRIDE_AT_PAIR_RATE = round(VAE_FRAME_DT_S / PAIR_DT_S)

# Human joints that drive the retargeting (q1..q7), used by the action generator.
DRIVING_HUMAN_INDICES = (
    Q1_SHOULDER_ABDUCTION,
    Q2_SHOULDER_FLEXION,
    Q3_SHOULDER_ROTATION,
    Q4_ELBOW_FLEXION,
    Q5_FOREARM_PRONATION,
    Q6_WRIST_DEVIATION,
    Q7_WRIST_FLEXION,
)

# Rest pose for the synthetic operator: arm forward, elbow bent, wrist in a
# light flexion.  Chosen so the retargeted robot configuration sits in the
# interior of every joint range instead of against the limits.
NEUTRAL_HUMAN_POSE_DEG = np.zeros(12)
NEUTRAL_HUMAN_POSE_DEG[Q1_SHOULDER_ABDUCTION] = 35.0
NEUTRAL_HUMAN_POSE_DEG[Q2_SHOULDER_FLEXION] = 90.0
NEUTRAL_HUMAN_POSE_DEG[Q3_SHOULDER_ROTATION] = 35.0
NEUTRAL_HUMAN_POSE_DEG[Q4_ELBOW_FLEXION] = -90.0
NEUTRAL_HUMAN_POSE_DEG[Q5_FOREARM_PRONATION] = 45.0
NEUTRAL_HUMAN_POSE_DEG[Q6_WRIST_DEVIATION] = 0.0
NEUTRAL_HUMAN_POSE_DEG[Q7_WRIST_FLEXION] = 10.0
NEUTRAL_HUMAN_POSE_DEG.flags.writeable = False

# Synthetic sweep span per driving joint, degrees (absolute angles).  The
# spans keep the retargeted robot joints inside the limit intervals, where
# the trajectory VAE's training distribution is dense; sweeps that park
# joints against a limit reconstruct visibly worse.
ACTION_SWEEP_DEG = {
    Q1_SHOULDER_ABDUCTION: (0.0, 75.0),
    Q2_SHOULDER_FLEXION: (70.0, 110.0),
    Q3_SHOULDER_ROTATION: (0.0, 75.0),
    Q4_ELBOW_FLEXION: (-110.0, -70.0),
    Q5_FOREARM_PRONATION: (-55.0, 145.0),
    Q6_WRIST_DEVIATION: (-55.0, 12.0),
    Q7_WRIST_FLEXION: (0.0, 28.0),
}

# Passive scapular coupling: the T4-shoulder trio follows the shoulder trio
# with this factor, mimicking how the shoulder girdle trails the arm.
SCAPULAR_COUPLING = 0.2


class TooFewFramesError(InvalidInputError):
    """Operation requires more trajectory frames than were provided."""


@dataclass(frozen=True)
class Trajectory:
    """A timed joint-angle path: strictly increasing timestamps, (N, 7) angles."""

    timestamps: np.ndarray
    angles_deg: np.ndarray

    def __post_init__(self):
        t = as_float_array(self.timestamps, "timestamps", (None,))
        a = as_float_array(self.angles_deg, "angles_deg", (None, 7))
        require_finite(t, "timestamps")
        require_finite(a, "angles_deg")
        if t.shape[0] != a.shape[0]:
            raise InvalidInputError("timestamps and angles_deg disagree in length")
        if t.shape[0] < 2:
            raise InvalidInputError("trajectory needs at least 2 frames")
        if not np.all(np.diff(t) > 0):
            raise InvalidInputError("timestamps must be strictly increasing")
        t.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "timestamps", t)
        object.__setattr__(self, "angles_deg", a)

    def __len__(self) -> int:
        return self.timestamps.shape[0]

    def frames(self):
        for t, row in zip(self.timestamps, self.angles_deg):
            yield float(t), JointConfiguration(row)


@dataclass(frozen=True)
class TrajectorySegment:
    """Two consecutive unit-encoded frames 0.1 s apart: the VAE's input unit."""

    values: np.ndarray
    dt_s: float = VAE_FRAME_DT_S

    def __post_init__(self):
        arr = as_float_array(self.values, "values", (2, 14))
        require_finite(arr, "values")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True)
class PairedSample:
    """One mapper training pair: encoded human pose and its latent target."""

    human24: np.ndarray
    latent10: np.ndarray

    def __post_init__(self):
        h = as_float_array(self.human24, "human24", (24,))
        z = as_float_array(self.latent10, "latent10", (10,))
        require_finite(h, "human24")
        require_finite(z, "latent10")
        h.flags.writeable = False
        z.flags.writeable = False
        object.__setattr__(self, "human24", h)
        object.__setattr__(self, "latent10", z)


# ---------------------------------------------------------------------------
# robot-side generation


def sample_pose_pairs(
    count: int,
    seed,
    joint_limits_deg: np.ndarray | None = None,
) -> list[tuple[JointConfiguration, JointConfiguration]]:
    """Sample ``count`` (start, end) configurations uniformly within limits."""
    if count < 1:
        raise InvalidInputError(f"count must be >= 1, got {count}")
    limits = DEFAULT_JOINT_LIMITS_DEG if joint_limits_deg is None else np.asarray(joint_limits_deg)
    rng = np.random.default_rng(seed)
    lo, hi = limits[:, 0], limits[:, 1]
    draws = rng.uniform(lo, hi, size=(count, 2, 7))
    return [
        (JointConfiguration(pair[0]), JointConfiguration(pair[1])) for pair in draws
    ]


def minimum_jerk_profile(tau: np.ndarray) -> np.ndarray:
    """Quintic time-scaling s(tau) = 10 tau^3 - 15 tau^4 + 6 tau^5 on [0, 1]."""
    return tau**3 * (10.0 + tau * (-15.0 + 6.0 * tau))


def generate_trajectory(
    start: JointConfiguration,
    end: JointConfiguration,
    duration_s: float,
    native_dt_s: float = 0.01,
) -> Trajectory:
    """Joint-space minimum-jerk interpolation from ``start`` to ``end``.

    Each joint follows the quintic profile, so velocity and acceleration are
    zero at both ends and intermediate angles stay within the convex hull of
    the endpoints (and therefore within limits whenever the endpoints are).
    """
    if not duration_s > 0:
        raise InvalidInputError(f"duration must be positive, got {duration_s}")
    n = max(2, int(round(duration_s / native_dt_s)) + 1)
    t = np.linspace(0.0, duration_s, n)
    s = minimum_jerk_profile(t / duration_s)
    angles = start.angles_deg + np.outer(s, end.angles_deg - start.angles_deg)
    return Trajectory(timestamps=t, angles_deg=angles)


def resample_channels(
    timestamps: np.ndarray, values: np.ndarray, dt_s: float
) -> tuple[np.ndarray, np.ndarray]:
    """Natural cubic spline resampling of (N, C) channels onto a dt grid.

    The output grid consists of the multiples of ``dt_s`` inside the input
    time range; the spline interpolates, so original knots that land on the
    grid are reproduced exactly.
    """
    t = as_float_array(timestamps, "timestamps", (None,))
    v = np.asarray(values, dtype=np.float64)
    if t.shape[0] < 4:
        raise TooFewFramesError(f"cubic spline needs >= 4 frames, got {t.shape[0]}")
    if not dt_s > 0:
        raise InvalidInputError(f"dt must be positive, got {dt_s}")
    eps = 1e-9
    first = int(np.ceil(t[0] / dt_s - eps))
    last = int(np.floor(t[-1] / dt_s + eps))
    if last < first + 1:
        raise InvalidInputError("input range too short for the requested grid")
    grid = np.arange(first, last + 1) * dt_s
    spline = CubicSpline(t, v, axis=0, bc_type="natural")
    return grid, spline(grid)


def resample_cubic_spline(traj: Trajectory, dt_s: float) -> Trajectory:
    """Resample a trajectory onto a dt grid, splining in encoded space.

    Splining the (cos, sin) channels instead of raw angles keeps the
    interpolation continuous across the +/-180 degree seam; the resampled
    pairs are decoded back to angles afterwards.
    """
    encoded = unit_encode(traj.angles_deg)
    grid, resampled = resample_channels(traj.timestamps, encoded, dt_s)
    return Trajectory(timestamps=grid, angles_deg=unit_decode(resampled))


def window_segments(traj: Trajectory, dt_s: float = VAE_FRAME_DT_S) -> list[TrajectorySegment]:
    """Split a 10 Hz trajectory into overlapping (current, next) segments."""
    if len(traj) < 2:
        raise TooFewFramesError("need at least 2 frames to window")
    spacing = np.diff(traj.timestamps)
    if np.any(np.abs(spacing - dt_s) > 1e-6):
        raise InvalidInputError(
            f"trajectory is not uniformly sampled at dt={dt_s}s (spacing {spacing.min()}..{spacing.max()})"
        )
    encoded = unit_encode(traj.angles_deg)
    stacked = np.stack([encoded[:-1], encoded[1:]], axis=1)
    return [TrajectorySegment(values=w, dt_s=dt_s) for w in stacked]


def segment_array(segments) -> np.ndarray:
    """Stack segments into the (N, 2, 14) array the VAE trains on."""
    if isinstance(segments, np.ndarray):
        return segments
    return np.stack([s.values for s in segments]) if segments else np.empty((0, 2, 14))


@dataclass(frozen=True)
class VaeDataset:
    """Windowed segments split 90/10 by whole trajectory."""

    train: np.ndarray
    val: np.ndarray
    trajectories: list[Trajectory]


def build_vae_dataset(
    trajectory_count: int,
    seed: int,
    joint_limits_deg: np.ndarray | None = None,
    duration_range_s: tuple[float, float] = (1.0, 5.0),
    val_fraction: float = 0.1,
) -> VaeDataset:
    """Generate, resample and window the robot trajectory dataset.

    Each trajectory draws its endpoints and duration from an RNG stream
    derived from (seed, index), so regeneration is deterministic regardless
    of evaluation order.
    """
    pairs = sample_pose_pairs(trajectory_count, seed, joint_limits_deg)
    trajectories = []
    per_traj_segments = []
    for i, (start, end) in enumerate(pairs):
        rng = np.random.default_rng([seed, i])
        duration = rng.uniform(*duration_range_s)
        native = generate_trajectory(start, end, duration)
        resampled = resample_cubic_spline(native, VAE_FRAME_DT_S)
        trajectories.append(resampled)
        per_traj_segments.append(segment_array(window_segments(resampled)))

    split_rng = np.random.default_rng([seed, trajectory_count, 1])
    order = split_rng.permutation(trajectory_count)
    n_val = max(1, int(round(val_fraction * trajectory_count))) if trajectory_count > 1 else 0
    val_ids = set(order[:n_val].tolist())
    train = [s for i, s in enumerate(per_traj_segments) if i not in val_ids]
    val = [s for i, s in enumerate(per_traj_segments) if i in val_ids]
    return VaeDataset(
        train=np.concatenate(train) if train else np.empty((0, 2, 14)),
        val=np.concatenate(val) if val else np.empty((0, 2, 14)),
        trajectories=trajectories,
    )


# ---------------------------------------------------------------------------
# human-side generation and pairing


def synthesize_human_action(
    action_index: int,
    single_joint_count: int,
    rng: np.random.Generator,
    duration_range_s: tuple[float, float] = (3.0, 6.0),
    native_dt_s: float = 0.01,
) -> tuple[np.ndarray, np.ndarray]:
    """One synthetic arm action as (timestamps, (N, 12) human angles).

    Actions below ``single_joint_count`` sweep exactly one driving joint
    (cycling through q1..q7); the rest move a random subset of 2-4 joints
    simultaneously.  The scapular trio passively follows the shoulder.
    """
    duration = rng.uniform(*duration_range_s)
    n = int(round(duration / native_dt_s)) + 1
    t = np.linspace(0.0, duration, n)
    s = minimum_jerk_profile(t / duration)

    start = NEUTRAL_HUMAN_POSE_DEG.copy()
    end = NEUTRAL_HUMAN_POSE_DEG.copy()
    if action_index < single_joint_count:
        moving = [DRIVING_HUMAN_INDICES[action_index % len(DRIVING_HUMAN_INDICES)]]
    else:
        k = int(rng.integers(2, 5))
        chosen = rng.choice(len(DRIVING_HUMAN_INDICES), size=k, replace=False)
        moving = [DRIVING_HUMAN_INDICES[int(c)] for c in chosen]
    for idx in moving:
        lo, hi = ACTION_SWEEP_DEG[idx]
        a, b = rng.uniform(lo, hi, size=2)
        start[idx] = a
        end[idx] = b

    angles = start + np.outer(s, end - start)
    angles[:, 0:3] = SCAPULAR_COUPLING * angles[:, 3:6]
    return t, angles


def scripted_operator_trajectory(
    seed: int,
    duration_s: float = 8.0,
    dt_s: float = PAIR_DT_S,
    moving_joints: int = 4,
) -> tuple[np.ndarray, np.ndarray]:
    """A held-out natural operator motion: smooth multi-sine joint waving.

    Unlike the minimum-jerk training actions, several joints oscillate
    simultaneously at incommensurate frequencies, so no pose subsequence of
    the training set reproduces it.  Amplitudes stay inside the synthetic
    sweep spans.  Returns (timestamps, (N, 12) human angles) on a 40 Hz grid.
    """
    rng = np.random.default_rng([seed, 40])
    n = int(round(duration_s / dt_s)) + 1
    t = np.linspace(0.0, duration_s, n)
    angles = np.tile(NEUTRAL_HUMAN_POSE_DEG.copy(), (n, 1))
    chosen = rng.choice(len(DRIVING_HUMAN_INDICES), size=moving_joints, replace=False)
    for c in chosen:
        idx = DRIVING_HUMAN_INDICES[int(c)]
        lo, hi = ACTION_SWEEP_DEG[idx]
        half_span = (hi - lo) / 2.0
        center = (hi + lo) / 2.0 + rng.uniform(-0.2, 0.2) * half_span
        amp = rng.uniform(0.3, 0.7) * half_span
        freq = rng.uniform(0.15, 0.45)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        # fade in from the neutral pose so the stream starts without a jump
        fade = np.clip(t / 1.0, 0.0, 1.0)
        wave = center + amp * np.sin(2.0 * np.pi * freq * t + phase)
        angles[:, idx] = (1.0 - fade) * angles[0, idx] + fade * wave
    angles[:, 0:3] = SCAPULAR_COUPLING * angles[:, 3:6]
    return t, angles


@dataclass(frozen=True)
class PairedDataset:
    """Mapper training pairs plus the matching direct-regression targets."""

    human24_train: np.ndarray
    latent10_train: np.ndarray
    robot14_train: np.ndarray
    human24_val: np.ndarray
    latent10_val: np.ndarray
    robot14_val: np.ndarray
    action_count: int

    @property
    def pair_count(self) -> int:
        return self.human24_train.shape[0] + self.human24_val.shape[0]


def synthesize_human_actions(
    action_count: int,
    seed: int,
    duration_range_s: tuple[float, float] = (3.0, 6.0),
    single_fraction: float = 74.0 / 86.0,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Generate the full synthetic action set (deterministic in ``seed``)."""
    if action_count < 1:
        raise InvalidInputError(f"action_count must be >= 1, got {action_count}")
    single = int(round(single_fraction * action_count))
    actions = []
    for i in range(action_count):
        rng = np.random.default_rng([seed, 7, i])
        actions.append(
            synthesize_human_action(i, single, rng, duration_range_s=duration_range_s)
        )
    return actions


def pair_action_with_latents(
    timestamps: np.ndarray,
    human_angles: np.ndarray,
    encoder,
    joint_limits_deg: np.ndarray | None = None,
    retarget_kwargs: dict | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pair one human action with latent encodings of the retargeted robot motion.

    Both streams are resampled to the 40 Hz pairing grid (splined in encoded
    space).  The latent target for human pose k is the encoder mean of the
    robot window (k, k + 4), i.e. the 0.1 s-spaced segment starting at k; the
    direct-regression target is the encoded robot frame at k + 4.
    """
    robot_angles = retarget_trajectory(
        human_angles, joint_limits_deg=joint_limits_deg, **(retarget_kwargs or {})
    )
    human_enc = unit_encode(human_angles)
    robot_enc = unit_encode(robot_angles)
    _, human40 = resample_channels(timestamps, human_enc, PAIR_DT_S)
    _, robot40 = resample_channels(timestamps, robot_enc, PAIR_DT_S)

    stride = WINDOW_STRIDE_AT_PAIR_RATE
    n_pairs = robot40.shape[0] - stride
    if n_pairs < 1:
        raise InvalidInputError("action too short to form any 0.1 s window at 40 Hz")
    windows = np.stack([robot40[:n_pairs], robot40[stride : stride + n_pairs]], axis=1)
    mu = encoder.transform(windows)
    return human40[:n_pairs], mu, robot40[stride : stride + n_pairs]


def synthesize_paired_dataset(
    action_count: int,
    encoder,
    seed: int,
    joint_limits_deg: np.ndarray | None = None,
    duration_range_s: tuple[float, float] = (3.0, 6.0),
    val_fraction: float = 0.1,
    retarget_kwargs: dict | None = None,
) -> PairedDataset:
    """Build the (human pose, latent mean) training pairs for the mapper.

    ``encoder`` must expose ``transform(segments) -> mu`` over (N, 2, 14)
    windows (a fitted VAE).  The 90/10 train/validation split is by whole
    action so overlapping windows never leak across the split.
    """
    if not hasattr(encoder, "transform"):
        raise InvalidInputError("encoder must be a fitted VAE exposing transform()")
    actions = synthesize_human_actions(action_count, seed, duration_range_s)
    per_action = [
        pair_action_with_latents(
            t, q, encoder, joint_limits_deg=joint_limits_deg, retarget_kwargs=retarget_kwargs
        )
        for t, q in actions
    ]

    split_rng = np.random.default_rng([seed, 7, action_count, 1])
    order = split_rng.permutation(action_count)
    n_val = max(1, int(round(val_fraction * action_count))) if action_count > 1 else 0
    val_ids = set(order[:n_val].tolist())

    def gather(ids):
        hs = [per_action[i][0] for i in ids]
        zs = [per_action[i][1] for i in ids]
        rs = [per_action[i][2] for i in ids]
        if not hs:
            return np.empty((0, 24)), np.empty((0, 10)), np.empty((0, 14))
        return np.concatenate(hs), np.concatenate(zs), np.concatenate(rs)

    train_ids = [i for i in range(action_count) if i not in val_ids]
    h_tr, z_tr, r_tr = gather(train_ids)
    h_va, z_va, r_va = gather(sorted(val_ids))
    return PairedDataset(
        human24_train=h_tr,
        latent10_train=z_tr,
        robot14_train=r_tr,
        human24_val=h_va,
        latent10_val=z_va,
        robot14_val=r_va,
        action_count=action_count,
    )


def ingest_recorded_human_data(path) -> list[tuple[float, HumanArmPose]]:
    """Load an externally recorded human pose stream from a record file."""
    timestamps, angles = records.read_human_pose_file(path)
    return [(float(t), HumanArmPose(q)) for t, q in zip(timestamps, angles)]
