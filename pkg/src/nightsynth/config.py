"""Generation configuration: schema, shipped defaults, and YAML loading."""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .degradation import EXPOSURE_PRESETS, ExposureRange, NoiseModel


class ConfigError(ValueError):
    pass


@dataclass
class GenerationConfig:
    inputs: list[str]
    output_dir: str | None
    bank_path: str
    n_tone_curves: int
    patch_size: int
    downscale_factor: int
    pairs_per_image: int
    master_seed: int
    workers: int
    bit_depth: int
    rerendered_gt: bool
    shared_reverse_params: bool
    wb_reference_channel: str
    spot_replay_fraction: float
    exposure: ExposureRange
    noise: NoiseModel
    config_dir: str = field(default=".")

    def validate(self) -> None:
        if self.patch_size <= 0 or self.patch_size % 2:
            raise ConfigError(f"patch_size must be a positive even number, got {self.patch_size}")
        if self.downscale_factor not in (1, 2):
            raise ConfigError(f"downscale_factor must be 1 or 2, got {self.downscale_factor}")
        if self.pairs_per_image < 1:
            raise ConfigError(f"pairs_per_image must be >= 1, got {self.pairs_per_image}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.bit_depth not in (8, 16):
            raise ConfigError(f"bit_depth must be 8 or 16, got {self.bit_depth}")
        if self.wb_reference_channel not in ("blue", "green"):
            raise ConfigError(
                f"wb_reference_channel must be 'blue' or 'green', got {self.wb_reference_channel!r}"
            )
        if not 0.0 <= self.spot_replay_fraction <= 1.0:
            raise ConfigError("spot_replay_fraction must be in [0, 1]")
        if self.n_tone_curves < 1:
            raise ConfigError("n_tone_curves must be >= 1")
        if self.master_seed < 0 or self.master_seed >= 2**64:
            raise ConfigError("master_seed must fit in an unsigned 64-bit integer")


def _parse_exposure(doc) -> ExposureRange:
    if isinstance(doc, dict) and "preset" in doc and doc["preset"] is not None:
        preset = str(doc["preset"])
        try:
            return EXPOSURE_PRESETS[preset]
        except KeyError:
            raise ConfigError(
                f"unknown exposure preset {preset!r}; known: {sorted(EXPOSURE_PRESETS)}"
            ) from None
    if isinstance(doc, dict) and "lo" in doc and "hi" in doc:
        return ExposureRange(float(doc["lo"]), float(doc["hi"]))
    raise ConfigError("exposure must give a preset name or an explicit {lo, hi} range")


def default_config_text() -> str:
    return (
        importlib.resources.files("nightsynth")
        .joinpath("data/default_config.yaml")
        .read_text()
    )


# Keys whose values are tagged unions: a user-supplied value replaces the
# default wholesale instead of deep-merging with it.
_ATOMIC_KEYS = {"exposure"}


def _merge(base: dict, override: dict, atomic: frozenset = frozenset()) -> dict:
    out = dict(base)
    for key, value in override.items():
        if key not in atomic and isinstance(value, dict) and isinstance(base.get(key), dict):
            out[key] = _merge(base[key], value)
        else:
            out[key] = value
    return out


def config_from_dict(doc: dict, config_dir: str = ".") -> GenerationConfig:
    defaults = yaml.safe_load(default_config_text())
    merged = _merge(defaults, doc or {}, atomic=frozenset(_ATOMIC_KEYS))
    known = set(defaults)
    unknown = set(merged) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    cfg = GenerationConfig(
        inputs=list(merged["inputs"] or []),
        output_dir=merged["output_dir"],
        bank_path=str(merged["bank_path"]),
        n_tone_curves=int(merged["n_tone_curves"]),
        patch_size=int(merged["patch_size"]),
        downscale_factor=int(merged["downscale_factor"]),
        pairs_per_image=int(merged["pairs_per_image"]),
        master_seed=int(merged["master_seed"]),
        workers=int(merged["workers"]),
        bit_depth=int(merged["bit_depth"]),
        rerendered_gt=bool(merged["rerendered_gt"]),
        shared_reverse_params=bool(merged["shared_reverse_params"]),
        wb_reference_channel=str(merged["wb_reference_channel"]),
        spot_replay_fraction=float(merged["spot_replay_fraction"]),
        exposure=_parse_exposure(merged["exposure"]),
        noise=NoiseModel.from_dict(merged["noise"]),
        config_dir=config_dir,
    )
    cfg.validate()
    return cfg


def load_config(path) -> GenerationConfig:
    """Load a YAML config file, filling unspecified keys from the shipped defaults.

    Relative input globs and the bank path are resolved against the config
    file's directory.
    """
    p = Path(path)
    try:
        doc = yaml.safe_load(p.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {p} is not valid YAML: {exc}") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {p} must contain a mapping")
    return config_from_dict(doc, config_dir=str(p.parent.resolve()))


def resolve_against_config(cfg: GenerationConfig, path_str: str) -> Path:
    p = Path(path_str)
    return p if p.is_absolute() else Path(cfg.config_dir) / p
