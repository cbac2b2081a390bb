#!/usr/bin/env python3
"""Build the repository's shipped desk-scale fixtures.

Trains the VAE, mapper and baseline under the default desk config, scripts a
held-out operator trajectory, derives three reachable targets from the
pipeline's own decoded path, and exports the offline end-effector path the
browser console's tests compare against.  Everything is seeded, so rerunning
this script reproduces the committed fixtures byte for byte.

Run from the repository root:  python3 scripts/build_fixtures.py
"""

import json
import sys
import time
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from armteleop import evaluation, records, trajectories  # noqa: E402
from armteleop.analysis import baseline_direct_regressor  # noqa: E402
from armteleop.cli import derive_targets_along_path, _held_out_operator  # noqa: E402
from armteleop.config import load_config  # noqa: E402
from armteleop.mapper import PoseMapper  # noqa: E402
from armteleop.vae import TrajectoryVAE  # noqa: E402

FIXTURES = ROOT / "fixtures"


def log(msg):
    print(f"[{time.strftime('%H:%M:%S')}] {msg}", flush=True)


def main():
    cfg = load_config()
    FIXTURES.mkdir(exist_ok=True)
    data_cfg = cfg.section("data")
    vae_cfg = cfg.section("vae")
    mapper_cfg = cfg.section("mapper")

    log("building robot trajectory dataset...")
    dataset = trajectories.build_vae_dataset(
        trajectory_count=int(data_cfg["trajectory_count"]),
        seed=cfg.seed,
        joint_limits_deg=cfg.joint_limits_deg,
        duration_range_s=tuple(data_cfg["duration_range_s"]),
        val_fraction=float(data_cfg["val_fraction"]),
    )
    log(f"  {dataset.train.shape[0]} train / {dataset.val.shape[0]} val segments")

    log("training VAE (desk preset)...")
    vae = TrajectoryVAE(
        hidden_size=int(vae_cfg["hidden_size"]),
        latent_size=int(vae_cfg["latent_size"]),
        gru_layers=int(vae_cfg["gru_layers"]),
        epochs=int(vae_cfg["epochs"]),
        batch_size=int(vae_cfg["batch_size"]),
        learning_rate=float(vae_cfg["learning_rate"]),
        warmup_epochs=int(vae_cfg["warmup_epochs"]),
        beta_max=float(vae_cfg["beta_max"]),
        annealing_cycles=int(vae_cfg["annealing_cycles"]),
        annealing_steepness=float(vae_cfg["annealing_steepness"]),
        beta_mode=str(vae_cfg["beta_mode"]),
        seed=cfg.seed,
    )
    vae.fit(dataset.train, X_val=dataset.val)
    h = vae.history_
    log(
        f"  epoch-1 val {h[0]['val_recon']:.4f} -> final val {h[-1]['val_recon']:.4f} "
        f"(ratio {h[-1]['val_recon'] / h[0]['val_recon']:.3f})"
    )
    vae.restore_best_validation()
    log(f"  shipping best-validation weights (epoch {vae.best_epoch_}, val {vae.best_val_recon_:.4f})")
    vae.save(FIXTURES / "vae.json", config_hash=cfg.config_hash)
    records.write_records(FIXTURES / "vae_history.jsonl", vae.history_)

    log("synthesizing paired dataset...")
    paired = trajectories.synthesize_paired_dataset(
        int(data_cfg["action_count"]),
        vae,
        cfg.seed,
        joint_limits_deg=cfg.joint_limits_deg,
        duration_range_s=tuple(data_cfg["action_duration_range_s"]),
        val_fraction=float(data_cfg["val_fraction"]),
        retarget_kwargs=cfg.retarget_kwargs,
    )
    log(f"  {paired.pair_count} pairs ({paired.human24_val.shape[0]} val)")

    log("training mapper...")
    mapper = PoseMapper(
        output_size=int(vae_cfg["latent_size"]),
        dropout_rate=float(mapper_cfg["dropout_rate"]),
        epochs=int(mapper_cfg["epochs"]),
        batch_size=int(mapper_cfg["batch_size"]),
        learning_rate=float(mapper_cfg["learning_rate"]),
        seed=cfg.seed,
    )
    mapper.fit(
        paired.human24_train,
        paired.latent10_train,
        X_val=paired.human24_val,
        y_val=paired.latent10_val,
    )
    mh = mapper.history_
    log(
        f"  epoch-1 val {mh[0]['val_mae']:.4f} -> final val {mh[-1]['val_mae']:.4f} "
        f"(ratio {mh[-1]['val_mae'] / mh[0]['val_mae']:.3f}; "
        f"best {mapper.best_val_mae_:.4f} at epoch {mapper.best_epoch_})"
    )
    mapper.restore_best_validation()
    mapper.save(FIXTURES / "mapper.json", config_hash=cfg.config_hash)
    records.write_records(FIXTURES / "mapper_history.jsonl", mapper.history_)

    log("training direct-regression baseline...")
    baseline = baseline_direct_regressor(
        paired.human24_train,
        paired.robot14_train,
        epochs=int(mapper_cfg["epochs"]),
        batch_size=int(mapper_cfg["batch_size"]),
        learning_rate=float(mapper_cfg["learning_rate"]),
        seed=cfg.seed,
        X_val=paired.human24_val,
        y_val=paired.robot14_val,
    )
    bh = baseline.history_
    log(
        f"  epoch-1 val {bh[0]['val_mae']:.4f} -> final val {bh[-1]['val_mae']:.4f} "
        f"(best {baseline.best_val_mae_:.4f} at epoch {baseline.best_epoch_})"
    )
    baseline.restore_best_validation()
    baseline.save(FIXTURES / "baseline.json", config_hash=cfg.config_hash)

    log("scripting held-out operator trajectory...")
    ts, qs = _held_out_operator(cfg)
    records.write_human_pose_file(FIXTURES / "operator.jsonl", ts, qs)
    log(f"  {ts.shape[0]} poses over {ts[-1]:.2f}s at 40 Hz")

    chain = cfg.chain()
    comparison = evaluation.compare_pipelines(
        vae, mapper, baseline, ts, qs, chain, joint_limits_deg=cfg.joint_limits_deg
    )
    log(
        f"pipeline comparison: vae {comparison['vae_mean_deviation_m']:.4f} m "
        f"vs baseline {comparison['baseline_mean_deviation_m']:.4f} m"
    )

    log("deriving targets from the decoded path...")
    angles = evaluation.decode_pipeline_angles(
        mapper, vae, qs, clamp_limits_deg=cfg.joint_limits_deg
    )
    path = evaluation.tip_path(chain, angles)
    targets = derive_targets_along_path(vae, mapper, chain, angles, path)
    records.write_target_file(FIXTURES / "targets.jsonl", targets)

    outcome = evaluation.run_trial(
        vae, mapper, ts, qs, targets, chain, joint_limits_deg=cfg.joint_limits_deg
    )
    summary = evaluation.summarize([outcome])
    log(
        f"target reaching: {outcome.targets_reached}/{outcome.targets_total} reached, "
        f"mean euclid {summary['overall']['euclidean_cm']['mean']:.3f} cm, "
        f"mean cos {summary['overall']['orientation_cos']['mean']:.4f}"
    )

    log("exporting console fixtures...")
    console_dir = ROOT / "frontend" / "fixtures"
    console_dir.mkdir(parents=True, exist_ok=True)
    chain_doc = {
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
        "joint_limits_deg": cfg.joint_limits_deg.tolist(),
        "human_range_deg": cfg.human_range_deg.tolist(),
    }
    (console_dir / "chain.json").write_text(records.dumps(chain_doc) + "\n")
    # offline reference: joint angles the service would reply with, plus the
    # matching FK tip positions, for the console's own FK cross-check
    offline = {
        "timestamps": ts,
        "joint_angles_deg": angles,
        "tip_path_m": path,
    }
    (console_dir / "offline_path.json").write_text(records.dumps(offline) + "\n")
    records.write_human_pose_file(console_dir / "operator.jsonl", ts, qs)

    log("fixtures complete.")


if __name__ == "__main__":
    main()
