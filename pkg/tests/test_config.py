import numpy as np
import pytest
import yaml

from armteleop.config import (
    DEFAULT_CONFIG,
    ConfigError,
    default_config_text,
    load_config,
    parse_override,
)


class TestLoading:
    def test_builtin_defaults_validate(self):
        cfg = load_config()
        assert cfg.preset == "desk"
        assert cfg.seed == 7
        assert cfg.joint_limits_deg.shape == (7, 2)
        assert len(cfg.chain().links) == 7

    def test_presets_differ(self):
        desk = load_config(preset="desk")
        full = load_config(preset="full")
        assert desk.section("vae")["epochs"] == 300
        assert full.section("vae")["epochs"] == 1500
        assert full.section("vae")["batch_size"] == 1024000
        assert desk.config_hash != full.config_hash

    def test_unknown_preset(self):
        with pytest.raises(ConfigError, match="preset"):
            load_config(preset="gpu-cluster")

    def test_file_loading_and_hash_stability(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text(default_config_text())
        a = load_config(path)
        b = load_config(path)
        assert a.config_hash == b.config_hash
        path.write_text(default_config_text() + "\n# trailing comment\n")
        c = load_config(path)
        assert c.config_hash != a.config_hash

    def test_env_var_path(self, tmp_path, monkeypatch):
        path = tmp_path / "env.yaml"
        path.write_text(yaml.safe_dump({"seed": 123}))
        monkeypatch.setenv("ARMTELEOP_CONFIG", str(path))
        cfg = load_config()
        assert cfg.seed == 123

    def test_partial_file_merges_over_defaults(self, tmp_path):
        path = tmp_path / "partial.yaml"
        path.write_text(yaml.safe_dump({"vae": {"epochs": 11}}))
        cfg = load_config(path)
        assert cfg.section("vae")["epochs"] == 11
        assert cfg.section("vae")["hidden_size"] == 28

    def test_shipped_default_file_matches_builtin(self):
        from pathlib import Path

        shipped = Path(__file__).resolve().parents[1] / "configs" / "default.yaml"
        assert yaml.safe_load(shipped.read_text()) == DEFAULT_CONFIG


class TestOverrides:
    def test_parse_override(self):
        path, value = parse_override("vae.epochs=25")
        assert path == ["vae", "epochs"]
        assert value == 25

    def test_parse_override_types(self):
        assert parse_override("vae.learning_rate=1e-4")[1] == pytest.approx(1e-4)
        assert parse_override("vae.beta_mode=constant")[1] == "constant"

    def test_override_applies(self):
        cfg = load_config(overrides=["vae.epochs=42", "seed=9"])
        assert cfg.section("vae")["epochs"] == 42
        assert cfg.seed == 9

    def test_override_does_not_change_hash(self):
        base = load_config()
        tweaked = load_config(overrides=["vae.epochs=5"])
        assert base.config_hash == tweaked.config_hash

    def test_unknown_field_rejected(self):
        with pytest.raises(ConfigError, match="unknown config"):
            load_config(overrides=["vae.bogus=1"])

    def test_malformed_override_rejected(self):
        with pytest.raises(ConfigError):
            load_config(overrides=["vae.epochs"])


class TestValidation:
    def test_negative_epochs_names_field(self):
        with pytest.raises(ConfigError, match="vae.epochs"):
            load_config(overrides=["vae.epochs=-1"])

    def test_bad_limits_shape(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text(yaml.safe_dump({"joint_limits_deg": [[0, 1], [0, 1]]}))
        with pytest.raises(ConfigError, match="joint_limits_deg"):
            load_config(path)

    def test_inverted_limit_interval(self, tmp_path):
        limits = [list(row) for row in DEFAULT_CONFIG["joint_limits_deg"]]
        limits[2] = [90.0, -15.0]
        path = tmp_path / "bad.yaml"
        path.write_text(yaml.safe_dump({"joint_limits_deg": limits}))
        with pytest.raises(ConfigError, match="min < max"):
            load_config(path)

    def test_bad_beta_mode(self):
        with pytest.raises(ConfigError, match="beta_mode"):
            load_config(overrides=["vae.beta_mode=linear"])

    def test_val_fraction_range(self):
        with pytest.raises(ConfigError, match="val_fraction"):
            load_config(overrides=["data.val_fraction=1.5"])

    def test_chain_built_from_config(self):
        chain = load_config().chain()
        assert chain.links[0].d_m == pytest.approx(0.28)
        assert chain.links[0].alpha_rad == pytest.approx(-np.pi / 2)
