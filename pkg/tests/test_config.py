"""Run-configuration loading, coercion and snapshots."""

import pytest
import yaml

from mixdesign import config as config_mod
from mixdesign.errors import ConfigError


class TestLoad:
    def test_defaults_valid(self):
        cfg = config_mod.load_config()
        assert cfg.alpha == 0.5
        assert cfg.split_seeds == [0, 1, 2, 3, 4]

    def test_yaml_file(self, tmp_path):
        p = tmp_path / "c.yaml"
        p.write_text("alpha: 0.25\nepochs: 12\nhidden: [16, 16]\n")
        cfg = config_mod.load_config(p)
        assert cfg.alpha == 0.25 and cfg.epochs == 12 and cfg.hidden == [16, 16]

    def test_override_coercion(self):
        cfg = config_mod.load_config(overrides=("epochs=7", "hidden=8,8",
                                                "standalone=true"))
        assert cfg.epochs == 7
        assert cfg.hidden == [8, 8]
        assert cfg.standalone is True

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="alfa"):
            config_mod.load_config(overrides=("alfa=1",))

    def test_invalid_alpha_named(self):
        with pytest.raises(ConfigError, match="alpha"):
            config_mod.load_config(overrides=("alpha=2",))

    def test_invalid_variant(self):
        with pytest.raises(ConfigError):
            config_mod.load_config(overrides=("variant=vae",))

    def test_malformed_override(self):
        with pytest.raises(ConfigError):
            config_mod.load_config(overrides=("epochs",))


class TestSnapshot:
    def test_round_trip(self, tmp_path):
        cfg = config_mod.load_config(overrides=("alpha=0.3", "epochs=9"))
        path = tmp_path / "snap.yaml"
        config_mod.save_snapshot(cfg, path)
        doc = yaml.safe_load(path.read_text())
        back = config_mod.load_config(path)
        assert doc["alpha"] == 0.3
        assert back.alpha == cfg.alpha and back.epochs == cfg.epochs
