"""Simulated target-reaching evaluation and pipeline comparison metrics.

A trial streams a recorded 40 Hz human pose trajectory through the trained
pipeline (mapper -> VAE decoder -> next-frame joint angles -> forward
kinematics) and measures, per target, the Euclidean tip error in centimeters
and the cosine similarity between the tool approach axis and the target
surface normal at the moment of first surface contact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import records
from .kinematics import (
    DEFAULT_JOINT_LIMITS_DEG,
    JointConfiguration,
    KinematicChain,
    forward_kinematics,
    retarget_trajectory,
    unit_decode,
    unit_encode,
)
from .validation import InvalidInputError, as_float_array, require_finite

CONTACT_TOLERANCE_M = 1e-3  # tip counts as touching within 1 mm of the plane


@dataclass(frozen=True)
class TargetPose:
    """A reachable target: center point, surface normal, and box extents."""

    target_id: int
    center_m: np.ndarray
    normal: np.ndarray
    extents_m: np.ndarray

    def __post_init__(self):
        center = as_float_array(self.center_m, "center_m", (3,))
        normal = as_float_array(self.normal, "normal", (3,))
        extents = as_float_array(self.extents_m, "extents_m", (3,))
        require_finite(center, "center_m")
        require_finite(extents, "extents_m")
        norm = np.linalg.norm(normal)
        if abs(norm - 1.0) > 1e-9:
            raise InvalidInputError(f"target normal must be unit length, got |n|={norm}")
        for arr in (center, normal, extents):
            arr.flags.writeable = False
        object.__setattr__(self, "center_m", center)
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "extents_m", extents)

    def contains(self, point_m: np.ndarray, tolerance_m: float = CONTACT_TOLERANCE_M) -> bool:
        offset = point_m - self.center_m
        in_box = np.all(np.abs(offset) <= self.extents_m + 1e-12)
        on_plane = abs(float(offset @ self.normal)) <= tolerance_m
        return bool(in_box and on_plane)


@dataclass(frozen=True)
class TrialResult:
    target_id: int
    completion_time_s: float
    euclidean_cm: float
    orientation_cos: float

    def __post_init__(self):
        if self.euclidean_cm < 0:
            raise InvalidInputError("euclidean_cm must be non-negative")


def euclidean_error(tip_m: np.ndarray, target: TargetPose) -> float:
    """Distance from the tool tip to the target center, in centimeters."""
    tip = as_float_array(tip_m, "tip_m", (3,))
    require_finite(tip, "tip_m")
    return float(np.linalg.norm(tip - target.center_m) * 100.0)


def orientation_similarity(ee_axis: np.ndarray, target_normal: np.ndarray) -> float:
    """Cosine similarity between the approach axis and the surface normal.

    Non-unit inputs are normalized (a warning-level contract, not an error):
    alignment is a direction property.
    """
    a = as_float_array(ee_axis, "ee_axis", (3,))
    b = as_float_array(target_normal, "target_normal", (3,))
    require_finite(a, "ee_axis")
    require_finite(b, "target_normal")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise InvalidInputError("orientation vectors must be nonzero")
    return float((a @ b) / (na * nb))


def read_target_file(path) -> list[TargetPose]:
    targets = []
    for line_number, record in records.read_records(path):
        try:
            targets.append(
                TargetPose(
                    target_id=int(record["id"]),
                    center_m=record["center_m"],
                    normal=record["normal"],
                    extents_m=record["extents_m"],
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise records.RecordFormatError(f"bad target record ({exc})", line_number) from exc
    return targets


# ---------------------------------------------------------------------------
# streaming pipeline


def decode_pipeline_angles(
    mapper,
    vae,
    human_angles_deg: np.ndarray,
    clamp_limits_deg: np.ndarray | None = None,
) -> np.ndarray:
    """Human angles (N, 12) -> robot angles (N, 7) via mapper + VAE decoder.

    Emits the decoded *next* frame (index 1), matching the serving path.
    """
    human = as_float_array(human_angles_deg, "human_angles_deg", (None, 12))
    encoded = unit_encode(human)
    latents = mapper.predict(encoded)
    segments = vae.decode(latents)
    angles = unit_decode(segments[:, 1, :])
    if clamp_limits_deg is not None:
        limits = np.asarray(clamp_limits_deg)
        angles = np.clip(angles, limits[:, 0], limits[:, 1])
    return angles


def tip_path(chain: KinematicChain, angles_deg: np.ndarray) -> np.ndarray:
    """End-effector tip positions (N, 3) for a joint-angle path (N, 7)."""
    arr = as_float_array(angles_deg, "angles_deg", (None, 7))
    out = np.empty((arr.shape[0], 3))
    for i, row in enumerate(arr):
        out[i] = forward_kinematics(chain, JointConfiguration(row)).position_m
    return out


@dataclass(frozen=True)
class TrialOutcome:
    """All per-target results of one streamed trial, plus completion state."""

    results: tuple[TrialResult, ...]
    completed: bool
    targets_reached: int
    targets_total: int


def run_trial(
    vae,
    mapper,
    timestamps: np.ndarray,
    human_angles_deg: np.ndarray,
    targets: list[TargetPose],
    chain: KinematicChain,
    joint_limits_deg: np.ndarray | None = None,
    contact_tolerance_m: float = CONTACT_TOLERANCE_M,
) -> TrialOutcome:
    """Stream a scripted operator trajectory and record first-contact metrics.

    Targets must be reached in order; a trajectory that ends early yields a
    partial (flagged) outcome.
    """
    t = as_float_array(timestamps, "timestamps", (None,))
    limits = DEFAULT_JOINT_LIMITS_DEG if joint_limits_deg is None else joint_limits_deg
    if t.shape[0] == 0:
        return TrialOutcome(
            results=(), completed=False, targets_reached=0, targets_total=len(targets)
        )
    if t.shape[0] != np.asarray(human_angles_deg).shape[0]:
        raise InvalidInputError("timestamps and poses disagree in length")
    angles = decode_pipeline_angles(mapper, vae, human_angles_deg, clamp_limits_deg=limits)

    results = []
    target_index = 0
    for k in range(angles.shape[0]):
        if target_index >= len(targets):
            break
        pose = forward_kinematics(chain, JointConfiguration(angles[k]))
        target = targets[target_index]
        if target.contains(pose.position_m, tolerance_m=contact_tolerance_m):
            results.append(
                TrialResult(
                    target_id=target.target_id,
                    completion_time_s=float(t[k]),
                    euclidean_cm=euclidean_error(pose.position_m, target),
                    orientation_cos=orientation_similarity(pose.approach_axis(), target.normal),
                )
            )
            target_index += 1
    return TrialOutcome(
        results=tuple(results),
        completed=target_index >= len(targets),
        targets_reached=target_index,
        targets_total=len(targets),
    )


# ---------------------------------------------------------------------------
# summaries


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=np.float64)
    mean = float(values.mean())
    if values.size < 2:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / np.sqrt(values.size))


def summarize(outcomes: list[TrialOutcome]) -> dict:
    """Aggregate trial outcomes into per-row metrics plus an overall row.

    Rows: one per (trial, target) in trial order, then one overall row with
    mean +/- standard error across all recorded contacts.
    """
    if not outcomes:
        raise InvalidInputError("no trial outcomes to summarize")
    rows = []
    for trial_index, outcome in enumerate(outcomes):
        for result in outcome.results:
            rows.append(
                {
                    "trial": trial_index,
                    "target": result.target_id,
                    "time_s": result.completion_time_s,
                    "euclidean_cm": result.euclidean_cm,
                    "orientation_cos": result.orientation_cos,
                }
            )
    all_euclid = np.array([r["euclidean_cm"] for r in rows]) if rows else np.empty(0)
    all_cos = np.array([r["orientation_cos"] for r in rows]) if rows else np.empty(0)
    all_time = np.array([r["time_s"] for r in rows]) if rows else np.empty(0)

    per_target = {}
    for target_id in sorted({r["target"] for r in rows}):
        sel_e = np.array([r["euclidean_cm"] for r in rows if r["target"] == target_id])
        sel_c = np.array([r["orientation_cos"] for r in rows if r["target"] == target_id])
        per_target[target_id] = {
            "euclidean_cm": _mean_stderr(sel_e),
            "orientation_cos": _mean_stderr(sel_c),
        }

    overall = {}
    if rows:
        for key, series in (
            ("euclidean_cm", all_euclid),
            ("orientation_cos", all_cos),
            ("time_s", all_time),
        ):
            mean, stderr = _mean_stderr(series)
            overall[key] = {"mean": mean, "stderr": stderr}
    return {
        "rows": rows,
        "per_target": per_target,
        "overall": overall,
        "completed_trials": sum(1 for o in outcomes if o.completed),
        "total_trials": len(outcomes),
    }


def format_report_table(summary: dict) -> str:
    """Fixed-width text rendering of a trial summary."""
    lines = [
        f"{'trial':>5}  {'target':>6}  {'time (s)':>9}  {'dist (cm)':>10}  {'cos':>6}",
    ]
    for row in summary["rows"]:
        lines.append(
            f"{row['trial']:>5}  {row['target']:>6}  {row['time_s']:>9.2f}  "
            f"{row['euclidean_cm']:>10.2f}  {row['orientation_cos']:>6.3f}"
        )
    if summary["overall"]:
        o = summary["overall"]
        lines.append(
            f"{'all':>5}  {'-':>6}  "
            f"{o['time_s']['mean']:>9.2f}  "
            f"{o['euclidean_cm']['mean']:>10.2f}  {o['orientation_cos']['mean']:>6.3f}"
        )
        lines.append(
            "mean +/- stderr: "
            f"{o['euclidean_cm']['mean']:.2f}+/-{o['euclidean_cm']['stderr']:.2f} cm, "
            f"cos {o['orientation_cos']['mean']:.3f}+/-{o['orientation_cos']['stderr']:.3f}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# pipeline-vs-baseline path comparison


def compare_pipelines(
    vae,
    mapper,
    baseline,
    timestamps: np.ndarray,
    human_angles_deg: np.ndarray,
    chain: KinematicChain,
    joint_limits_deg: np.ndarray | None = None,
) -> dict:
    """End-effector paths of both pipelines against the retargeted reference.

    The reference path retargets the human poses directly (the ground-truth
    robot motion the models were trained to imitate).  Neither model output
    is clamped here; the comparison measures raw model fidelity.
    """
    human = as_float_array(human_angles_deg, "human_angles_deg", (None, 12))
    reference_angles = retarget_trajectory(human, joint_limits_deg=joint_limits_deg)
    vae_angles = decode_pipeline_angles(mapper, vae, human)
    baseline_angles = unit_decode(baseline.predict(unit_encode(human)))

    ref_path = tip_path(chain, reference_angles)
    vae_path = tip_path(chain, vae_angles)
    base_path = tip_path(chain, baseline_angles)
    vae_dev = np.linalg.norm(vae_path - ref_path, axis=1)
    base_dev = np.linalg.norm(base_path - ref_path, axis=1)
    return {
        "timestamps": np.asarray(timestamps, dtype=np.float64),
        "reference_path_m": ref_path,
        "vae_path_m": vae_path,
        "baseline_path_m": base_path,
        "vae_mean_deviation_m": float(vae_dev.mean()),
        "baseline_mean_deviation_m": float(base_dev.mean()),
    }
