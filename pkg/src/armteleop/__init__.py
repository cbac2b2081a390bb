"""Human-arm to 7-DOF manipulator teleoperation via a GRU-VAE latent space."""

from .kinematics import (
    DEFAULT_JOINT_LIMITS_DEG,
    EndEffectorPose,
    HumanArmPose,
    JointConfiguration,
    KinematicChain,
    LinkParameters,
    UnitEncodedFrame,
    decode_angles,
    default_chain,
    encode_angles,
    encode_human_pose,
    forward_kinematics,
    retarget_human_to_robot,
    unit_decode,
    unit_encode,
)
from .mapper import PoseMapper
from .trajectories import (
    PairedSample,
    Trajectory,
    TrajectorySegment,
    generate_trajectory,
    ingest_recorded_human_data,
    resample_cubic_spline,
    sample_pose_pairs,
    synthesize_paired_dataset,
    window_segments,
)
from .vae import AnnealingSchedule, LatentDistribution, TrajectoryVAE, beta_at, kld, reparameterize

__version__ = "0.1.0"

__all__ = [
    "AnnealingSchedule",
    "DEFAULT_JOINT_LIMITS_DEG",
    "EndEffectorPose",
    "HumanArmPose",
    "JointConfiguration",
    "KinematicChain",
    "LatentDistribution",
    "LinkParameters",
    "PairedSample",
    "PoseMapper",
    "Trajectory",
    "TrajectorySegment",
    "TrajectoryVAE",
    "UnitEncodedFrame",
    "beta_at",
    "decode_angles",
    "default_chain",
    "encode_angles",
    "encode_human_pose",
    "forward_kinematics",
    "generate_trajectory",
    "ingest_recorded_human_data",
    "kld",
    "reparameterize",
    "resample_cubic_spline",
    "retarget_human_to_robot",
    "sample_pose_pairs",
    "synthesize_paired_dataset",
    "unit_decode",
    "unit_encode",
    "window_segments",
]
