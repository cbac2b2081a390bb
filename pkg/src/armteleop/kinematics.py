"""Robot and human arm kinematics: angle encoding, forward kinematics, retargeting.

Angles live in degrees on the canonical interval (-180, 180].  Anywhere a
trajectory is interpolated or learned we first project each angle d to the
unit-circle pair (cos d, sin d), which removes the seam at +/-180 degrees.

The retargeting rules map the 12 tracked human arm angles onto the 7 robot
joints: shoulder drives J1-J3, elbow flexion drives J4, forearm rotation
drives J5, and the wrist's flexion/deviation drives J6 with a conditional
J5/J7 counter-rotation that keeps the hand-back and end-effector facing
aligned during wrist flexion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .validation import InvalidInputError, as_float_array, require_finite

# Default limits for robot joints J1..J7, degrees (min, max).
DEFAULT_JOINT_LIMITS_DEG = np.array(
    [
        [-15.0, 90.0],
        [60.0, 120.0],
        [-15.0, 90.0],
        [-120.0, -60.0],
        [-90.0, 180.0],
        [-90.0, 30.0],
        [-90.0, 0.0],
    ]
)

# Default anatomical range for each of the 12 human angles, degrees.
DEFAULT_HUMAN_RANGE_DEG = np.array([[-180.0, 180.0]] * 12)

#: Order of the 12 tracked human angles.  The first trio is the
#: scapular (T4-shoulder) group, then shoulder, elbow and wrist; each
#: trio is (abduction/adduction | deviation, rotation | pronation,
#: flexion/extension) following the tracker's export order.
HUMAN_ANGLE_NAMES = (
    "t4_shoulder_abduction",
    "t4_shoulder_rotation",
    "t4_shoulder_flexion",
    "shoulder_abduction",
    "shoulder_rotation",
    "shoulder_flexion",
    "elbow_deviation",
    "elbow_pronation",
    "elbow_flexion",
    "wrist_deviation",
    "wrist_pronation",
    "wrist_flexion",
)

# Indices of the seven driving human angles q1..q7 within a HumanArmPose.
Q1_SHOULDER_ABDUCTION = 3
Q2_SHOULDER_FLEXION = 5
Q3_SHOULDER_ROTATION = 4
Q4_ELBOW_FLEXION = 8
Q5_FOREARM_PRONATION = 7
Q6_WRIST_DEVIATION = 9
Q7_WRIST_FLEXION = 11


class DegeneratePairError(InvalidInputError):
    """A (cos, sin) pair of exact zeros cannot be decoded to an angle."""


class JointLimitError(InvalidInputError):
    """A joint angle lies outside its configured limit interval."""


@dataclass(frozen=True)
class JointConfiguration:
    """Seven manipulator joint angles in degrees, ordered J1..J7."""

    angles_deg: np.ndarray

    def __post_init__(self):
        arr = as_float_array(self.angles_deg, "angles_deg", (7,))
        require_finite(arr, "angles_deg")
        arr.flags.writeable = False
        object.__setattr__(self, "angles_deg", arr)

    def within_limits(self, limits_deg: np.ndarray | None = None) -> bool:
        limits = DEFAULT_JOINT_LIMITS_DEG if limits_deg is None else np.asarray(limits_deg)
        return bool(
            np.all(self.angles_deg >= limits[:, 0]) and np.all(self.angles_deg <= limits[:, 1])
        )

    def require_within_limits(self, limits_deg: np.ndarray | None = None) -> "JointConfiguration":
        if not self.within_limits(limits_deg):
            raise JointLimitError(f"joint angles {self.angles_deg} violate limits")
        return self

    def clamped(self, limits_deg: np.ndarray | None = None) -> "JointConfiguration":
        limits = DEFAULT_JOINT_LIMITS_DEG if limits_deg is None else np.asarray(limits_deg)
        return JointConfiguration(np.clip(self.angles_deg, limits[:, 0], limits[:, 1]))


@dataclass(frozen=True)
class HumanArmPose:
    """Twelve tracked human arm angles in degrees (see HUMAN_ANGLE_NAMES)."""

    angles_deg: np.ndarray

    def __post_init__(self):
        arr = as_float_array(self.angles_deg, "angles_deg", (12,))
        require_finite(arr, "angles_deg")
        arr.flags.writeable = False
        object.__setattr__(self, "angles_deg", arr)


@dataclass(frozen=True)
class UnitEncodedFrame:
    """Unit-circle encoding of 7 joint angles: (cos d1, sin d1, ..., cos d7, sin d7)."""

    values: np.ndarray

    def __post_init__(self):
        arr = as_float_array(self.values, "values", (14,))
        require_finite(arr, "values")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True)
class EndEffectorPose:
    """Tool-frame pose: position in meters plus a unit quaternion (w, x, y, z)."""

    position_m: np.ndarray
    quaternion: np.ndarray

    def __post_init__(self):
        pos = as_float_array(self.position_m, "position_m", (3,))
        quat = as_float_array(self.quaternion, "quaternion", (4,))
        require_finite(pos, "position_m")
        require_finite(quat, "quaternion")
        if abs(np.linalg.norm(quat) - 1.0) > 1e-9:
            raise InvalidInputError("quaternion must have unit norm")
        pos.flags.writeable = False
        quat.flags.writeable = False
        object.__setattr__(self, "position_m", pos)
        object.__setattr__(self, "quaternion", quat)

    def approach_axis(self) -> np.ndarray:
        """Tool-frame z-axis in world coordinates (the approach direction)."""
        return quat_rotate(self.quaternion, np.array([0.0, 0.0, 1.0]))


@dataclass(frozen=True)
class LinkParameters:
    """Classic Denavit-Hartenberg parameters of one revolute joint."""

    d_m: float
    a_m: float
    alpha_rad: float
    theta_offset_rad: float = 0.0


@dataclass(frozen=True)
class KinematicChain:
    """A serial chain of 7 revolute joints plus a base frame pose."""

    links: tuple[LinkParameters, ...]
    base_position_m: np.ndarray = field(
        default_factory=lambda: np.zeros(3)
    )
    base_quaternion: np.ndarray = field(
        default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0])
    )

    def __post_init__(self):
        if len(self.links) != 7:
            raise InvalidInputError(f"chain must have exactly 7 joints, got {len(self.links)}")
        pos = as_float_array(self.base_position_m, "base_position_m", (3,))
        quat = as_float_array(self.base_quaternion, "base_quaternion", (4,))
        require_finite(pos, "base_position_m")
        require_finite(quat, "base_quaternion")
        for link in self.links:
            require_finite(
                np.array([link.d_m, link.a_m, link.alpha_rad, link.theta_offset_rad]),
                "link parameters",
            )
        pos.flags.writeable = False
        quat.flags.writeable = False
        object.__setattr__(self, "base_position_m", pos)
        object.__setattr__(self, "base_quaternion", quat)


def default_chain() -> KinematicChain:
    """A generic 7-DOF arm with alternating joint axes (shoulder-elbow-wrist).

    The shape only needs to be a plausible, consistent serial arm for pose
    metrics; links follow a spherical-roll-pitch layout with roughly 1.25 m
    of reach.
    """
    half_pi = np.pi / 2
    return KinematicChain(
        links=(
            LinkParameters(d_m=0.28, a_m=0.0, alpha_rad=-half_pi),
            LinkParameters(d_m=0.0, a_m=0.0, alpha_rad=half_pi),
            LinkParameters(d_m=0.42, a_m=0.0, alpha_rad=-half_pi),
            LinkParameters(d_m=0.0, a_m=0.0, alpha_rad=half_pi),
            LinkParameters(d_m=0.40, a_m=0.0, alpha_rad=-half_pi),
            LinkParameters(d_m=0.0, a_m=0.0, alpha_rad=half_pi),
            LinkParameters(d_m=0.16, a_m=0.0, alpha_rad=0.0),
        )
    )


# ---------------------------------------------------------------------------
# unit-value encoding


def unit_encode(angles_deg: np.ndarray) -> np.ndarray:
    """Project angles (degrees) to interleaved (cos, sin) pairs.

    Works on any trailing angle dimension: shape (..., n) -> (..., 2n).
    """
    arr = np.asarray(angles_deg, dtype=np.float64)
    require_finite(arr, "angles_deg")
    rad = np.deg2rad(arr)
    out = np.empty(arr.shape[:-1] + (2 * arr.shape[-1],))
    out[..., 0::2] = np.cos(rad)
    out[..., 1::2] = np.sin(rad)
    return out


def unit_decode(values: np.ndarray) -> np.ndarray:
    """Invert :func:`unit_encode` via atan2; pairs need not be on the circle.

    Returns angles in degrees on (-180, 180].  A pair of exact zeros is
    ambiguous and raises :class:`DegeneratePairError`.
    """
    arr = np.asarray(values, dtype=np.float64)
    require_finite(arr, "values")
    if arr.shape[-1] % 2 != 0:
        raise InvalidInputError("encoded values must have an even trailing dimension")
    cos_part = arr[..., 0::2]
    sin_part = arr[..., 1::2]
    if np.any((cos_part == 0.0) & (sin_part == 0.0)):
        raise DegeneratePairError("encoded pair with cos = sin = 0 has no angle")
    deg = np.rad2deg(np.arctan2(sin_part, cos_part))
    # atan2 returns [-180, 180]; fold -180 onto the canonical +180.
    deg[deg == -180.0] = 180.0
    return deg


def encode_angles(config: JointConfiguration) -> UnitEncodedFrame:
    """Encode a joint configuration as 14 projected unit values."""
    return UnitEncodedFrame(unit_encode(config.angles_deg))


def decode_angles(frame: UnitEncodedFrame) -> JointConfiguration:
    """Decode 14 unit values back to joint angles in (-180, 180] degrees."""
    return JointConfiguration(unit_decode(frame.values))


def encode_human_pose(pose: HumanArmPose) -> np.ndarray:
    """Encode the 12 human angles as 24 unit values (network input layout)."""
    return unit_encode(pose.angles_deg)


# ---------------------------------------------------------------------------
# quaternions and forward kinematics


def quat_from_matrix(rot: np.ndarray) -> np.ndarray:
    """Rotation matrix -> unit quaternion (w, x, y, z), w >= 0."""
    m = rot
    t = np.trace(m)
    if t > 0:
        s = np.sqrt(t + 1.0) * 2
        q = np.array(
            [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
        )
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2
        q = np.array(
            [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
        )
    elif m[1, 1] > m[2, 2]:
        s = np.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2
        q = np.array(
            [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]
        )
    else:
        s = np.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2
        q = np.array(
            [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]
        )
    q = q / np.linalg.norm(q)
    # Fix the sign ambiguity so equal rotations compare equal.
    if q[0] < 0 or (q[0] == 0 and q[[1, 2, 3]][np.nonzero(q[[1, 2, 3]])[0][0]] < 0):
        q = -q
    return q


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) -> 3x3 rotation matrix."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    return quat_to_matrix(q) @ v


def rpy_deg_to_quat(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Roll/pitch/yaw in degrees (x-y-z extrinsic) -> unit quaternion."""
    r, p, y = np.deg2rad([roll, pitch, yaw])
    cr, sr = np.cos(r / 2), np.sin(r / 2)
    cp, sp = np.cos(p / 2), np.sin(p / 2)
    cy, sy = np.cos(y / 2), np.sin(y / 2)
    q = np.array(
        [
            cr * cp * cy + sr * sp * sy,
            sr * cp * cy - cr * sp * sy,
            cr * sp * cy + sr * cp * sy,
            cr * cp * sy - sr * sp * cy,
        ]
    )
    return q if q[0] >= 0 else -q


def dh_transform(theta_rad: float, d_m: float, a_m: float, alpha_rad: float) -> np.ndarray:
    """Classic DH homogeneous transform Rz(theta) Tz(d) Tx(a) Rx(alpha)."""
    ct, st = np.cos(theta_rad), np.sin(theta_rad)
    ca, sa = np.cos(alpha_rad), np.sin(alpha_rad)
    return np.array(
        [
            [ct, -st * ca, st * sa, a_m * ct],
            [st, ct * ca, -ct * sa, a_m * st],
            [0.0, sa, ca, d_m],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def chain_transforms(chain: KinematicChain, config: JointConfiguration) -> np.ndarray:
    """Cumulative 4x4 transforms after the base and each joint, shape (8, 4, 4)."""
    base = np.eye(4)
    base[:3, :3] = quat_to_matrix(chain.base_quaternion / np.linalg.norm(chain.base_quaternion))
    base[:3, 3] = chain.base_position_m
    frames = np.empty((8, 4, 4))
    frames[0] = base
    theta = np.deg2rad(config.angles_deg)
    current = base
    for i, link in enumerate(chain.links):
        current = current @ dh_transform(
            theta[i] + link.theta_offset_rad, link.d_m, link.a_m, link.alpha_rad
        )
        frames[i + 1] = current
    return frames


def forward_kinematics(chain: KinematicChain, config: JointConfiguration) -> EndEffectorPose:
    """Compose the 7 per-joint transforms and return the tool-frame pose."""
    tip = chain_transforms(chain, config)[-1]
    return EndEffectorPose(position_m=tip[:3, 3].copy(), quaternion=quat_from_matrix(tip[:3, :3]))


# ---------------------------------------------------------------------------
# human-to-robot retargeting


@dataclass(frozen=True)
class RetargetResult:
    """Retargeted joint configuration plus which values had to be clamped."""

    config: JointConfiguration
    input_clamped: np.ndarray
    output_clamped: np.ndarray

    @property
    def any_clamped(self) -> bool:
        return bool(self.input_clamped.any() or self.output_clamped.any())


def wrist_alignment(
    q6_deg: float,
    q7_deg: float,
    alignment_gain: float = 1.0,
    deviation_cutoff_deg: float = 10.0,
) -> float:
    """Conditional J5 alignment rotation for wrist flexion/extension.

    During wrist flexion the forearm roll joint turns by ``gain * q7`` so the
    J6 axis lines up with the flexion axis (J7 counter-rotates by the same
    amount).  Ulnar/radial deviation suppresses the alignment; the linear
    fade over ``deviation_cutoff_deg`` keeps the rule continuous instead of
    switching hard at q6 = 0.
    """
    fade = max(0.0, 1.0 - abs(q6_deg) / deviation_cutoff_deg)
    return alignment_gain * q7_deg * fade


def retarget_human_to_robot(
    pose: HumanArmPose,
    joint_limits_deg: np.ndarray | None = None,
    human_range_deg: np.ndarray | None = None,
    alignment_gain: float = 1.0,
    deviation_cutoff_deg: float = 10.0,
) -> RetargetResult:
    """Map a human arm pose onto the 7 robot joints.

    J1/J2 follow the shoulder (abduction, flexion), J3 the internal rotation,
    J4 the elbow flexion, J5 the forearm roll plus the conditional wrist
    alignment, J6 the combined wrist flexion/deviation, and J7 cancels the
    alignment term so the end-effector facing stays fixed.  The output is
    clamped to the robot's joint limits; clamping on either side is reported
    in the result metadata.
    """
    limits = DEFAULT_JOINT_LIMITS_DEG if joint_limits_deg is None else np.asarray(joint_limits_deg)
    ranges = DEFAULT_HUMAN_RANGE_DEG if human_range_deg is None else np.asarray(human_range_deg)

    raw = pose.angles_deg
    clipped = np.clip(raw, ranges[:, 0], ranges[:, 1])
    input_clamped = clipped != raw

    q1 = clipped[Q1_SHOULDER_ABDUCTION]
    q2 = clipped[Q2_SHOULDER_FLEXION]
    q3 = clipped[Q3_SHOULDER_ROTATION]
    q4 = clipped[Q4_ELBOW_FLEXION]
    q5 = clipped[Q5_FOREARM_PRONATION]
    q6 = clipped[Q6_WRIST_DEVIATION]
    q7 = clipped[Q7_WRIST_FLEXION]

    align = wrist_alignment(q6, q7, alignment_gain, deviation_cutoff_deg)
    mapped = np.array([q1, q2, q3, q4, q5 + align, q6 + q7, -align])

    out = np.clip(mapped, limits[:, 0], limits[:, 1])
    output_clamped = out != mapped
    return RetargetResult(
        config=JointConfiguration(out),
        input_clamped=input_clamped,
        output_clamped=output_clamped,
    )


def retarget_trajectory(
    angles_deg: np.ndarray,
    joint_limits_deg: np.ndarray | None = None,
    **kwargs,
) -> np.ndarray:
    """Vectorized retargeting of an (N, 12) human angle array to (N, 7)."""
    arr = as_float_array(angles_deg, "angles_deg", (None, 12))
    out = np.empty((arr.shape[0], 7))
    for i, row in enumerate(arr):
        out[i] = retarget_human_to_robot(
            HumanArmPose(row), joint_limits_deg=joint_limits_deg, **kwargs
        ).config.angles_deg
    return out
