"""Run configuration: one declarative YAML file with desk and full presets.

The desk preset trains everything in minutes on a laptop; the full preset
carries the reference hyperparameters (500 trajectories, 1,500 epochs, batch
1,024,000).  CLI flags override individual fields after preset resolution.

Every pipeline artifact records the SHA-256 of the config file bytes plus the
preset name, so a pipeline accidentally mixing artifacts from different
configurations aborts instead of producing silently inconsistent results.
"""

from __future__ import annotations

import copy
import hashlib
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .kinematics import KinematicChain, LinkParameters, rpy_deg_to_quat

ENV_CONFIG_PATH = "ARMTELEOP_CONFIG"


class ConfigError(ValueError):
    """Configuration field failed validation; message names the field."""


DEFAULT_CONFIG: dict = {
    "seed": 7,
    "joint_limits_deg": [
        [-15.0, 90.0],
        [60.0, 120.0],
        [-15.0, 90.0],
        [-120.0, -60.0],
        [-90.0, 180.0],
        [-90.0, 30.0],
        [-90.0, 0.0],
    ],
    "human_range_deg": [[-180.0, 180.0]] * 12,
    "chain": {
        "base": {"position_m": [0.0, 0.0, 0.0], "rpy_deg": [0.0, 0.0, 0.0]},
        "links": [
            {"d_m": 0.28, "a_m": 0.0, "alpha_deg": -90.0, "offset_deg": 0.0},
            {"d_m": 0.0, "a_m": 0.0, "alpha_deg": 90.0, "offset_deg": 0.0},
            {"d_m": 0.42, "a_m": 0.0, "alpha_deg": -90.0, "offset_deg": 0.0},
            {"d_m": 0.0, "a_m": 0.0, "alpha_deg": 90.0, "offset_deg": 0.0},
            {"d_m": 0.40, "a_m": 0.0, "alpha_deg": -90.0, "offset_deg": 0.0},
            {"d_m": 0.0, "a_m": 0.0, "alpha_deg": 90.0, "offset_deg": 0.0},
            {"d_m": 0.16, "a_m": 0.0, "alpha_deg": 0.0, "offset_deg": 0.0},
        ],
    },
    "retarget": {"alignment_gain": 1.0, "deviation_cutoff_deg": 10.0},
    "data": {
        "trajectory_count": 400,
        "duration_range_s": [1.0, 5.0],
        "action_count": 86,
        "action_duration_range_s": [3.0, 6.0],
        "val_fraction": 0.1,
    },
    "vae": {
        "epochs": 300,
        "batch_size": 128,
        "learning_rate": 2e-3,
        "warmup_epochs": 25,
        "hidden_size": 28,
        "latent_size": 10,
        "gru_layers": 2,
        "beta_max": 0.1,
        "annealing_cycles": 4,
        "annealing_steepness": 12.0,
        "beta_mode": "cyclical",
    },
    "mapper": {
        "epochs": 500,
        "batch_size": 256,
        "learning_rate": 1e-3,
        "dropout_rate": 0.5,
    },
    "analysis": {"trials": 1000, "steps": 100},
    "evaluation": {"contact_tolerance_m": 0.001},
    "service": {"host": "127.0.0.1", "port": 8793, "latency_window": 4096},
    "paths": {
        "data_dir": "runs/data",
        "checkpoint_dir": "runs/checkpoints",
        "report_dir": "runs/reports",
    },
    "presets": {
        "desk": {},
        "full": {
            "data": {"trajectory_count": 500},
            "vae": {
                "epochs": 1500,
                "batch_size": 1024000,
                "learning_rate": 1e-4,
                "warmup_epochs": 0,
            },
            "analysis": {"trials": 10000},
        },
    },
}


def _deep_merge(base: dict, override: dict) -> dict:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def default_config_text() -> str:
    return yaml.safe_dump(DEFAULT_CONFIG, sort_keys=True)


def _coerce(text: str):
    try:
        value = yaml.safe_load(text)
    except yaml.YAMLError:
        return text
    if isinstance(value, str):
        # YAML 1.1 reads "1e-4" as a string; overrides mean numbers
        try:
            return float(value)
        except ValueError:
            return value
    return value


def parse_override(spec: str) -> tuple[list[str], object]:
    """Parse a ``section.key=value`` override into (path, value)."""
    if "=" not in spec:
        raise ConfigError(f"override {spec!r} must look like section.key=value")
    key, _, raw = spec.partition("=")
    path = [p for p in key.strip().split(".") if p]
    if not path:
        raise ConfigError(f"override {spec!r} has an empty key")
    return path, _coerce(raw.strip())


def _apply_override(tree: dict, path: list[str], value) -> None:
    node = tree
    for part in path[:-1]:
        if part not in node or not isinstance(node[part], dict):
            raise ConfigError(f"unknown config section {'.'.join(path)!r}")
        node = node[part]
    if path[-1] not in node:
        raise ConfigError(f"unknown config field {'.'.join(path)!r}")
    node[path[-1]] = value


@dataclass(frozen=True)
class RunConfig:
    """A fully resolved configuration plus its identity hash."""

    raw: dict
    preset: str
    config_hash: str
    source: str

    # -- validated accessors -------------------------------------------------

    @property
    def seed(self) -> int:
        return int(self.raw["seed"])

    @property
    def joint_limits_deg(self) -> np.ndarray:
        return np.asarray(self.raw["joint_limits_deg"], dtype=np.float64)

    @property
    def human_range_deg(self) -> np.ndarray:
        return np.asarray(self.raw["human_range_deg"], dtype=np.float64)

    @property
    def retarget_kwargs(self) -> dict:
        r = self.raw["retarget"]
        return {
            "alignment_gain": float(r["alignment_gain"]),
            "deviation_cutoff_deg": float(r["deviation_cutoff_deg"]),
        }

    def chain(self) -> KinematicChain:
        spec = self.raw["chain"]
        links = tuple(
            LinkParameters(
                d_m=float(link["d_m"]),
                a_m=float(link["a_m"]),
                alpha_rad=float(np.deg2rad(link["alpha_deg"])),
                theta_offset_rad=float(np.deg2rad(link.get("offset_deg", 0.0))),
            )
            for link in spec["links"]
        )
        base = spec.get("base", {})
        return KinematicChain(
            links=links,
            base_position_m=np.asarray(base.get("position_m", [0, 0, 0]), dtype=np.float64),
            base_quaternion=rpy_deg_to_quat(*base.get("rpy_deg", [0, 0, 0])),
        )

    def section(self, name: str) -> dict:
        return self.raw[name]

    def path(self, key: str, root: str | Path = ".") -> Path:
        return Path(root) / self.raw["paths"][key]

    def validate(self) -> "RunConfig":
        limits = self.joint_limits_deg
        if limits.shape != (7, 2):
            raise ConfigError("joint_limits_deg must be a 7x2 table")
        if np.any(limits[:, 0] >= limits[:, 1]):
            raise ConfigError("joint_limits_deg rows must satisfy min < max")
        if self.human_range_deg.shape != (12, 2):
            raise ConfigError("human_range_deg must be a 12x2 table")
        if len(self.raw["chain"]["links"]) != 7:
            raise ConfigError("chain.links must list exactly 7 joints")
        for section, fields in (
            ("vae", ("epochs", "batch_size", "learning_rate", "hidden_size", "latent_size")),
            ("mapper", ("epochs", "batch_size", "learning_rate")),
            ("data", ("trajectory_count", "action_count")),
            ("analysis", ("trials", "steps")),
        ):
            for field_name in fields:
                value = self.raw[section][field_name]
                if not value > 0:
                    raise ConfigError(f"{section}.{field_name} must be positive, got {value}")
        if not 0.0 <= float(self.raw["data"]["val_fraction"]) < 1.0:
            raise ConfigError("data.val_fraction must be in [0, 1)")
        if not 0.0 <= float(self.raw["mapper"]["dropout_rate"]) < 1.0:
            raise ConfigError("mapper.dropout_rate must be in [0, 1)")
        if self.raw["vae"]["beta_mode"] not in ("cyclical", "constant", "off"):
            raise ConfigError("vae.beta_mode must be cyclical, constant or off")
        return self


def load_config(
    path: str | Path | None = None,
    preset: str = "desk",
    overrides: list[str] | None = None,
) -> RunConfig:
    """Load, resolve and validate a run configuration.

    Resolution order for the file: explicit ``path``, the ARMTELEOP_CONFIG
    environment variable, then the built-in defaults.  ``overrides`` are
    ``section.key=value`` strings applied after preset merging; they do not
    change the config hash (the hash identifies the file + preset so chained
    commands with per-command flag tweaks still interoperate).
    """
    if path is None:
        path = os.environ.get(ENV_CONFIG_PATH) or None
    if path is not None:
        text = Path(path).read_text()
        source = str(path)
        tree = yaml.safe_load(text)
        if not isinstance(tree, dict):
            raise ConfigError(f"config file {path} must contain a mapping")
        tree = _deep_merge(DEFAULT_CONFIG, tree)
    else:
        text = default_config_text()
        source = "<builtin>"
        tree = copy.deepcopy(DEFAULT_CONFIG)

    presets = tree.pop("presets", {})
    if preset not in presets:
        raise ConfigError(
            f"unknown preset {preset!r}; available: {', '.join(sorted(presets))}"
        )
    resolved = _deep_merge(tree, presets[preset] or {})
    digest = hashlib.sha256(text.encode() + b"\x00" + preset.encode()).hexdigest()

    for spec in overrides or []:
        override_path, value = parse_override(spec)
        _apply_override(resolved, override_path, value)

    return RunConfig(raw=resolved, preset=preset, config_hash=digest, source=source).validate()
