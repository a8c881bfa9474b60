import pytest

from nightsynth import config_from_dict, load_config
from nightsynth.config import ConfigError
from nightsynth.degradation import ExposureRange


class TestDefaults:
    def test_shipped_defaults_load(self):
        cfg = config_from_dict({})
        assert cfg.patch_size == 156
        assert cfg.downscale_factor == 2
        assert cfg.bit_depth == 8
        assert cfg.exposure == ExposureRange(-0.5, 3.5)
        assert cfg.noise.a_r == 2.18
        assert cfg.noise.sigma_r == 0.26
        assert cfg.n_tone_curves == 200
        assert cfg.wb_reference_channel == "blue"

    def test_partial_noise_override(self):
        cfg = config_from_dict({"noise": {"sigma_r": 0.0}})
        assert cfg.noise.sigma_r == 0.0
        assert cfg.noise.a_r == 2.18  # untouched keys keep their defaults

    def test_exposure_override_is_atomic(self):
        cfg = config_from_dict({"exposure": {"lo": 1.0, "hi": 1.0}})
        assert cfg.exposure == ExposureRange(1.0, 1.0)

    def test_exposure_presets(self):
        cfg = config_from_dict({"exposure": {"preset": "stops-0-20"}})
        assert cfg.exposure == ExposureRange(0.0, 20.0)
        with pytest.raises(ConfigError, match="unknown exposure preset"):
            config_from_dict({"exposure": {"preset": "nonsense"}})


class TestValidation:
    def test_odd_patch_rejected(self):
        with pytest.raises(ConfigError, match="even"):
            config_from_dict({"patch_size": 155})

    def test_bad_depth_rejected(self):
        with pytest.raises(ConfigError, match="bit_depth"):
            config_from_dict({"bit_depth": 12})

    def test_bad_downscale_rejected(self):
        with pytest.raises(ConfigError, match="downscale_factor"):
            config_from_dict({"downscale_factor": 3})

    def test_zero_pairs_rejected(self):
        with pytest.raises(ConfigError, match="pairs_per_image"):
            config_from_dict({"pairs_per_image": 0})

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            config_from_dict({"patchsize": 8})

    def test_bad_wb_reference_rejected(self):
        with pytest.raises(ConfigError, match="wb_reference_channel"):
            config_from_dict({"wb_reference_channel": "red"})


class TestFileLoading:
    def test_yaml_file(self, tmp_path):
        (tmp_path / "c.yaml").write_text("patch_size: 32\nmaster_seed: 5\n")
        cfg = load_config(tmp_path / "c.yaml")
        assert cfg.patch_size == 32
        assert cfg.master_seed == 5
        assert cfg.config_dir == str(tmp_path.resolve())

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.yaml")

    def test_invalid_yaml(self, tmp_path):
        (tmp_path / "c.yaml").write_text("patch_size: [unclosed")
        with pytest.raises(ConfigError, match="not valid YAML"):
            load_config(tmp_path / "c.yaml")

    def test_non_mapping_rejected(self, tmp_path):
        (tmp_path / "c.yaml").write_text("- just\n- a\n- list\n")
        with pytest.raises(ConfigError, match="mapping"):
            load_config(tmp_path / "c.yaml")
