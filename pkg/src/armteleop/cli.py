"""Command-line entry point wiring the full pipeline.

Subcommands: gen-data, train-vae, train-mapper, train-baseline, analyze,
evaluate, serve, gradcheck.  Every command resolves the shared config file
(flag, ARMTELEOP_CONFIG env var, or built-in defaults), applies CLI
overrides, validates, and aborts with a diagnostic when artifacts produced
under a different config are mixed into the pipeline.  Logs go to stderr;
data only ever goes to files.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import analysis, evaluation, records, trajectories
from .config import ConfigError, RunConfig, load_config
from .gradcheck_targets import standard_battery
from .mapper import PoseMapper
from .nn.gradcheck import check_gradients
from .vae import TrajectoryVAE

log = logging.getLogger("armteleop")

GRADCHECK_TOLERANCE = 1e-4


class PipelineError(SystemExit):
    def __init__(self, message: str):
        log.error(message)
        super().__init__(1)


# ---------------------------------------------------------------------------
# artifact manifest


def write_manifest(directory: Path, cfg: RunConfig, command: str) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "manifest.json").write_text(
        json.dumps(
            {"config_hash": cfg.config_hash, "preset": cfg.preset, "command": command},
            indent=2,
        )
        + "\n"
    )


def check_manifest(directory: Path, cfg: RunConfig) -> None:
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise PipelineError(f"{directory} has no manifest.json; run gen-data first")
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("config_hash") != cfg.config_hash:
        raise PipelineError(
            f"config hash mismatch: {directory} was generated under "
            f"{manifest.get('config_hash', '?')[:12]}..., current config is "
            f"{cfg.config_hash[:12]}... (preset {cfg.preset}); regenerate or fix --config/--preset"
        )


def check_checkpoint_hash(doc_hash: str, cfg: RunConfig, path) -> None:
    if doc_hash and doc_hash != cfg.config_hash:
        raise PipelineError(
            f"config hash mismatch: checkpoint {path} was trained under "
            f"{doc_hash[:12]}..., current config is {cfg.config_hash[:12]}..."
        )


def _load_vae(path, cfg: RunConfig) -> TrajectoryVAE:
    if not Path(path).exists():
        raise PipelineError(f"VAE checkpoint {path} not found; run train-vae first")
    model = TrajectoryVAE.from_checkpoint(path)
    check_checkpoint_hash(model.checkpoint_config_hash_, cfg, path)
    return model


def _load_mapper(path, cfg: RunConfig) -> PoseMapper:
    if not Path(path).exists():
        raise PipelineError(f"mapper checkpoint {path} not found; run train-mapper first")
    model = PoseMapper.from_checkpoint(path)
    check_checkpoint_hash(model.checkpoint_config_hash_, cfg, path)
    return model


# ---------------------------------------------------------------------------
# commands


def cmd_gen_data(cfg: RunConfig, args) -> int:
    data_cfg = cfg.section("data")
    data_dir = cfg.path("data_dir", args.root)
    dataset = trajectories.build_vae_dataset(
        trajectory_count=int(data_cfg["trajectory_count"]),
        seed=cfg.seed,
        joint_limits_deg=cfg.joint_limits_deg,
        duration_range_s=tuple(data_cfg["duration_range_s"]),
        val_fraction=float(data_cfg["val_fraction"]),
    )
    data_dir.mkdir(parents=True, exist_ok=True)
    records.write_trajectory_file(data_dir / "trajectories.jsonl", dataset.trajectories)
    records.write_segment_file(data_dir / "segments_train.jsonl", dataset.train)
    records.write_segment_file(data_dir / "segments_val.jsonl", dataset.val)

    actions = trajectories.synthesize_human_actions(
        int(data_cfg["action_count"]),
        cfg.seed,
        duration_range_s=tuple(data_cfg["action_duration_range_s"]),
    )
    records.write_records(
        data_dir / "human_actions.jsonl",
        (
            {"id": i, "timestamps": t, "q_deg": q}
            for i, (t, q) in enumerate(actions)
        ),
    )
    write_manifest(data_dir, cfg, "gen-data")
    log.info(
        "wrote %d train / %d val segments from %d trajectories and %d human actions to %s",
        dataset.train.shape[0],
        dataset.val.shape[0],
        len(dataset.trajectories),
        len(actions),
        data_dir,
    )
    return 0


def cmd_train_vae(cfg: RunConfig, args) -> int:
    data_dir = cfg.path("data_dir", args.root)
    check_manifest(data_dir, cfg)
    train = records.read_segment_file(data_dir / "segments_train.jsonl")
    val = records.read_segment_file(data_dir / "segments_val.jsonl")
    v = cfg.section("vae")
    model = TrajectoryVAE(
        hidden_size=int(v["hidden_size"]),
        latent_size=int(v["latent_size"]),
        gru_layers=int(v["gru_layers"]),
        epochs=int(v["epochs"]),
        batch_size=int(v["batch_size"]),
        learning_rate=float(v["learning_rate"]),
        beta_max=float(v["beta_max"]),
        annealing_cycles=int(v["annealing_cycles"]),
        annealing_steepness=float(v["annealing_steepness"]),
        beta_mode=str(v["beta_mode"]),
        warmup_epochs=int(v.get("warmup_epochs", 0)),
        seed=cfg.seed,
    )
    log.info("training VAE on %d segments (%d epochs)...", train.shape[0], model.epochs)
    model.fit(train, X_val=val)
    if model.best_state_ is not None:
        model.restore_best_validation()
        log.info("checkpointing best-validation epoch %d", model.best_epoch_)
    ckpt_dir = cfg.path("checkpoint_dir", args.root)
    out = Path(args.out) if args.out else ckpt_dir / "vae.json"
    digest = model.save(out, config_hash=cfg.config_hash)
    records.write_records(out.with_name(out.stem + "_history.jsonl"), model.history_)
    final = model.history_[-1]
    log.info(
        "VAE checkpoint %s (params %s...): recon %.5f val %.5f",
        out,
        digest[:12],
        final["recon"],
        final.get("val_recon", float("nan")),
    )
    return 0


def _ensure_pairs(cfg: RunConfig, args, vae: TrajectoryVAE) -> None:
    """Synthesize and persist pair files if they are not already present."""
    data_dir = cfg.path("data_dir", args.root)
    if (data_dir / "pairs_train.jsonl").exists():
        return
    data_cfg = cfg.section("data")
    log.info("synthesizing paired dataset (%d actions)...", int(data_cfg["action_count"]))
    paired = trajectories.synthesize_paired_dataset(
        int(data_cfg["action_count"]),
        vae,
        cfg.seed,
        joint_limits_deg=cfg.joint_limits_deg,
        duration_range_s=tuple(data_cfg["action_duration_range_s"]),
        val_fraction=float(data_cfg["val_fraction"]),
        retarget_kwargs=cfg.retarget_kwargs,
    )
    records.write_pair_file(data_dir / "pairs_train.jsonl", paired.human24_train, paired.latent10_train)
    records.write_pair_file(data_dir / "pairs_val.jsonl", paired.human24_val, paired.latent10_val)
    records.write_baseline_pair_file(
        data_dir / "baseline_pairs_train.jsonl", paired.human24_train, paired.robot14_train
    )
    records.write_baseline_pair_file(
        data_dir / "baseline_pairs_val.jsonl", paired.human24_val, paired.robot14_val
    )
    log.info("paired dataset: %d pairs (%d val)", paired.pair_count, paired.human24_val.shape[0])


def _mapper_from_config(cfg: RunConfig, output_size: int) -> PoseMapper:
    m = cfg.section("mapper")
    return PoseMapper(
        output_size=output_size,
        dropout_rate=float(m["dropout_rate"]),
        epochs=int(m["epochs"]),
        batch_size=int(m["batch_size"]),
        learning_rate=float(m["learning_rate"]),
        seed=cfg.seed,
    )


def cmd_train_mapper(cfg: RunConfig, args) -> int:
    data_dir = cfg.path("data_dir", args.root)
    check_manifest(data_dir, cfg)
    vae = _load_vae(args.vae or cfg.path("checkpoint_dir", args.root) / "vae.json", cfg)
    _ensure_pairs(cfg, args, vae)
    X, y = records.read_pair_file(data_dir / "pairs_train.jsonl")
    Xv, yv = records.read_pair_file(data_dir / "pairs_val.jsonl")
    model = _mapper_from_config(cfg, output_size=int(cfg.section("vae")["latent_size"]))
    log.info("training mapper on %d pairs (%d epochs)...", X.shape[0], model.epochs)
    model.fit(X, y, X_val=Xv, y_val=yv)
    if model.best_state_ is not None:
        model.restore_best_validation()
        log.info("checkpointing best-validation epoch %d", model.best_epoch_)
    out = Path(args.out) if args.out else cfg.path("checkpoint_dir", args.root) / "mapper.json"
    digest = model.save(out, config_hash=cfg.config_hash)
    records.write_records(out.with_name(out.stem + "_history.jsonl"), model.history_)
    final = model.history_[-1]
    log.info(
        "mapper checkpoint %s (params %s...): train %.5f val %.5f",
        out,
        digest[:12],
        final["train_mae"],
        final.get("val_mae", float("nan")),
    )
    return 0


def cmd_train_baseline(cfg: RunConfig, args) -> int:
    data_dir = cfg.path("data_dir", args.root)
    check_manifest(data_dir, cfg)
    vae = _load_vae(args.vae or cfg.path("checkpoint_dir", args.root) / "vae.json", cfg)
    _ensure_pairs(cfg, args, vae)
    X, y = records.read_baseline_pair_file(data_dir / "baseline_pairs_train.jsonl")
    Xv, yv = records.read_baseline_pair_file(data_dir / "baseline_pairs_val.jsonl")
    model = _mapper_from_config(cfg, output_size=14)
    log.info("training direct-regression baseline on %d pairs...", X.shape[0])
    model.fit(X, y, X_val=Xv, y_val=yv)
    if model.best_state_ is not None:
        model.restore_best_validation()
        log.info("checkpointing best-validation epoch %d", model.best_epoch_)
    out = Path(args.out) if args.out else cfg.path("checkpoint_dir", args.root) / "baseline.json"
    digest = model.save(out, config_hash=cfg.config_hash)
    records.write_records(out.with_name(out.stem + "_history.jsonl"), model.history_)
    log.info("baseline checkpoint %s (params %s...)", out, digest[:12])
    return 0


def _held_out_operator(cfg: RunConfig) -> tuple[np.ndarray, np.ndarray]:
    """A scripted operator motion no training action reproduces (multi-sine)."""
    return trajectories.scripted_operator_trajectory(seed=cfg.seed + 9001)


def _read_operator(path) -> tuple[np.ndarray, np.ndarray]:
    ts, qs = records.read_human_pose_file(path)
    if ts.shape[0] == 0:
        raise PipelineError(f"operator file {path} is empty")
    return ts, qs


def cmd_analyze(cfg: RunConfig, args) -> int:
    vae = _load_vae(args.vae or cfg.path("checkpoint_dir", args.root) / "vae.json", cfg)
    a = cfg.section("analysis")
    report_dir = cfg.path("report_dir", args.root)
    report_dir.mkdir(parents=True, exist_ok=True)

    trials = args.trials or int(a["trials"])
    matrix = analysis.latent_joint_correlation(vae, trials=trials, seed=cfg.seed, steps=int(a["steps"]))
    score = analysis.disentanglement_score(matrix)
    (report_dir / "correlation.csv").write_text(analysis.correlation_csv(matrix))
    report = analysis.correlation_report(matrix, score)
    report["config_hash"] = cfg.config_hash
    records.write_records(report_dir / "correlation_report.jsonl", [report])
    log.info("disentanglement score %.4f over %d trials -> %s", score, trials, report_dir)

    mapper_path = args.mapper or cfg.path("checkpoint_dir", args.root) / "mapper.json"
    baseline_path = args.baseline or cfg.path("checkpoint_dir", args.root) / "baseline.json"
    if Path(mapper_path).exists() and Path(baseline_path).exists():
        mapper = _load_mapper(mapper_path, cfg)
        baseline = _load_mapper(baseline_path, cfg)
        if args.operator:
            ts, qs = _read_operator(args.operator)
        else:
            ts, qs = _held_out_operator(cfg)
        comparison = evaluation.compare_pipelines(
            vae, mapper, baseline, ts, qs, cfg.chain(), joint_limits_deg=cfg.joint_limits_deg
        )
        records.write_records(
            report_dir / "comparison_paths.jsonl",
            (
                {
                    "t": float(comparison["timestamps"][i]),
                    "reference_m": comparison["reference_path_m"][i],
                    "vae_m": comparison["vae_path_m"][i],
                    "baseline_m": comparison["baseline_path_m"][i],
                }
                for i in range(comparison["timestamps"].shape[0])
            ),
        )
        records.write_records(
            report_dir / "comparison_summary.jsonl",
            [
                {
                    "vae_mean_deviation_m": comparison["vae_mean_deviation_m"],
                    "baseline_mean_deviation_m": comparison["baseline_mean_deviation_m"],
                    "config_hash": cfg.config_hash,
                }
            ],
        )
        log.info(
            "pipeline comparison: vae %.4f m vs baseline %.4f m mean deviation",
            comparison["vae_mean_deviation_m"],
            comparison["baseline_mean_deviation_m"],
        )
    return 0


def cmd_evaluate(cfg: RunConfig, args) -> int:
    vae = _load_vae(args.vae or cfg.path("checkpoint_dir", args.root) / "vae.json", cfg)
    mapper = _load_mapper(args.mapper or cfg.path("checkpoint_dir", args.root) / "mapper.json", cfg)
    chain = cfg.chain()
    report_dir = cfg.path("report_dir", args.root)
    report_dir.mkdir(parents=True, exist_ok=True)

    if args.operator:
        ts, qs = _read_operator(args.operator)
    else:
        ts, qs = _held_out_operator(cfg)
        records.write_human_pose_file(report_dir / "operator_scripted.jsonl", ts, qs)
        log.info("no --operator given; scripted operator written to %s", report_dir)

    if args.targets:
        targets = evaluation.read_target_file(args.targets)
    else:
        angles = evaluation.decode_pipeline_angles(
            mapper, vae, qs, clamp_limits_deg=cfg.joint_limits_deg
        )
        path = evaluation.tip_path(chain, angles)
        targets = derive_targets_along_path(vae, mapper, chain, angles, path)
        records.write_target_file(report_dir / "targets_derived.jsonl", targets)
        log.info("no --targets given; %d derived targets written to %s", len(targets), report_dir)

    outcome = evaluation.run_trial(
        vae,
        mapper,
        ts,
        qs,
        targets,
        chain,
        joint_limits_deg=cfg.joint_limits_deg,
        contact_tolerance_m=float(cfg.section("evaluation")["contact_tolerance_m"]),
    )
    summary = evaluation.summarize([outcome])
    summary["config_hash"] = cfg.config_hash
    records.write_records(report_dir / "evaluation_report.jsonl", [summary])
    (report_dir / "evaluation_table.txt").write_text(evaluation.format_report_table(summary))
    log.info(
        "evaluation: %d/%d targets reached%s",
        outcome.targets_reached,
        outcome.targets_total,
        "" if outcome.completed else " (partial: trajectory ended early)",
    )
    if summary["overall"]:
        log.info(
            "mean euclidean %.2f cm, mean cosine %.3f",
            summary["overall"]["euclidean_cm"]["mean"],
            summary["overall"]["orientation_cos"]["mean"],
        )
    return 0


def derive_targets_along_path(
    vae, mapper, chain, angles: np.ndarray, path: np.ndarray, extent_m: float = 0.06
) -> list[evaluation.TargetPose]:
    """Place 3 targets on the decoded path (center = tip, normal = approach)."""
    from .kinematics import forward_kinematics as fk, JointConfiguration

    n = path.shape[0]
    picks = [int(round(f * (n - 1))) for f in (0.35, 0.65, 0.95)]
    targets = []
    for tid, k in enumerate(picks, start=1):
        pose = fk(chain, JointConfiguration(angles[k]))
        targets.append(
            evaluation.TargetPose(
                target_id=tid,
                center_m=path[k],
                normal=pose.approach_axis(),
                extents_m=np.array([extent_m] * 3),
            )
        )
    return targets


def cmd_serve(cfg: RunConfig, args) -> int:
    from .service import load_app_from_checkpoints, serve

    vae_path = args.vae or cfg.path("checkpoint_dir", args.root) / "vae.json"
    mapper_path = args.mapper or cfg.path("checkpoint_dir", args.root) / "mapper.json"
    for path, name in ((vae_path, "train-vae"), (mapper_path, "train-mapper")):
        if not Path(path).exists():
            raise PipelineError(f"checkpoint {path} not found; run {name} first")
    svc = cfg.section("service")
    app = load_app_from_checkpoints(
        vae_path,
        mapper_path,
        cfg.chain(),
        cfg.joint_limits_deg,
        human_range_deg=cfg.human_range_deg,
        latency_window=int(svc["latency_window"]),
    )
    host = args.host or str(svc["host"])
    port = args.port or int(svc["port"])
    log.info("serving on %s:%d (ws at /ws, health at /health)", host, port)
    serve(app, host, port)
    return 0


def cmd_gradcheck(cfg: RunConfig, args) -> int:
    battery = standard_battery(seed=cfg.seed)
    worst = 0.0
    failed = []
    for name, target in battery.items():
        report = check_gradients(target, max_per_tensor=args.sample)
        status = "ok" if report.max_rel_err < GRADCHECK_TOLERANCE else "FAIL"
        print(f"{name:<24} {status}  {report}")
        worst = max(worst, report.max_rel_err)
        if report.max_rel_err >= GRADCHECK_TOLERANCE:
            failed.append(name)
    print(f"worst relative error {worst:.3e} (tolerance {GRADCHECK_TOLERANCE:g})")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="armteleop",
        description="Human-arm teleoperation of a 7-DOF manipulator via a GRU-VAE latent space.",
    )
    parser.add_argument("--config", help="path to the YAML config file")
    parser.add_argument("--preset", default="desk", help="config preset (desk or full)")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override a config field (repeatable)",
    )
    parser.add_argument("--root", default=".", help="base directory for runs/ outputs")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("gen-data", help="generate trajectory, segment and human-action datasets")

    p = sub.add_parser("train-vae", help="train the trajectory VAE")
    p.add_argument("--epochs", type=int)
    p.add_argument("--beta-mode", choices=["cyclical", "constant", "off"])
    p.add_argument("--out")

    for name, help_text in (
        ("train-mapper", "train the human-pose-to-latent mapper"),
        ("train-baseline", "train the direct-regression baseline"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--epochs", type=int)
        p.add_argument("--vae")
        p.add_argument("--out")

    p = sub.add_parser("analyze", help="latent correlation analysis and pipeline comparison")
    p.add_argument("--trials", type=int)
    p.add_argument("--vae")
    p.add_argument("--mapper")
    p.add_argument("--baseline")
    p.add_argument("--operator")

    p = sub.add_parser("evaluate", help="simulated target-reaching evaluation")
    p.add_argument("--vae")
    p.add_argument("--mapper")
    p.add_argument("--operator")
    p.add_argument("--targets")

    p = sub.add_parser("serve", help="run the real-time teleoperation service")
    p.add_argument("--vae")
    p.add_argument("--mapper")
    p.add_argument("--host")
    p.add_argument("--port", type=int)

    p = sub.add_parser("gradcheck", help="finite-difference verification of backpropagation")
    p.add_argument("--sample", type=int, default=None, help="probe at most N elements per tensor")

    return parser


def _flag_overrides(args) -> list[str]:
    """Translate convenience flags into config overrides."""
    extra = []
    if getattr(args, "epochs", None) is not None:
        section = "mapper" if args.command in ("train-mapper", "train-baseline") else "vae"
        extra.append(f"{section}.epochs={args.epochs}")
    if getattr(args, "beta_mode", None):
        extra.append(f"vae.beta_mode={args.beta_mode}")
    return extra


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train-vae": cmd_train_vae,
    "train-mapper": cmd_train_mapper,
    "train-baseline": cmd_train_baseline,
    "analyze": cmd_analyze,
    "evaluate": cmd_evaluate,
    "serve": cmd_serve,
    "gradcheck": cmd_gradcheck,
}


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(
            path=args.config, preset=args.preset, overrides=args.overrides + _flag_overrides(args)
        )
    except ConfigError as exc:
        log.error("invalid config: %s", exc)
        return 1
    except FileNotFoundError as exc:
        log.error("config file not found: %s", exc)
        return 1
    try:
        return COMMANDS[args.command](cfg, args)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 1


if __name__ == "__main__":
    sys.exit(main())
