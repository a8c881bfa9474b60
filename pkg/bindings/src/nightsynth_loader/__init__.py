"""In-process pair synthesis for ML dataloaders.

A Generator wraps (config file, asset bank, master seed) and serves
(low, normal) float32 array pairs on demand. Output for a given index is
bit-identical to what the batch CLI writes for the same config and seed:
both paths share the parameter-derivation and synthesis code, so parity is
structural, not coincidental. Arrays cross the boundary as contiguous HxWx3
float32 buffers; no image files are touched.
"""

from __future__ import annotations

from threading import Lock

import numpy as np

from nightsynth import load_config, load_or_build_bank, params_for_pair_index, SampledParams
from nightsynth import synthesize_pair as _synthesize_pair_arrays
from nightsynth.config import resolve_against_config

__version__ = "0.1.0"

__all__ = ["Generator", "synthesize_pair"]


def _validate_image(image) -> np.ndarray:
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an HxWx3 array, got shape {arr.shape}")
    if arr.shape[0] % 2 or arr.shape[1] % 2:
        raise ValueError(
            f"image dimensions must be even for mosaicing, got {arr.shape[0]}x{arr.shape[1]}"
        )
    arr = np.ascontiguousarray(arr, dtype=np.float32)
    if not np.isfinite(arr).all():
        raise ValueError("image contains non-finite samples")
    lo, hi = float(arr.min()), float(arr.max())
    if lo < 0.0 or hi > 1.0:
        raise ValueError(f"image values must lie in [0,1], got range [{lo}, {hi}]")
    return arr


class Generator:
    """Handle over (config path, master seed) serving deterministic pairs.

    Thread-safe: concurrent synthesize_pair calls are allowed, each pull
    derives its own generator state from (seed, index).
    """

    def __init__(self, config_path, seed: int):
        cfg = load_config(config_path)
        cfg.master_seed = int(seed)
        cfg.validate()
        self._config = cfg
        # the bank build (when missing) must not race between handles
        with _BANK_BUILD_LOCK:
            self._bank = load_or_build_bank(
                resolve_against_config(cfg, cfg.bank_path), cfg.n_tone_curves
            )

    @property
    def master_seed(self) -> int:
        return self._config.master_seed

    @property
    def bank_hash(self) -> str:
        return self._bank.hash

    def params_for(self, index: int) -> SampledParams:
        """The parameter record the pipeline will use for this pull."""
        if index < 0:
            raise ValueError(f"index must be >= 0, got {index}")
        return params_for_pair_index(self._config, self._bank, index)

    def synthesize_pair(self, image, index: int):
        """Synthesize one (low, normal, params) triple from an sRGB array in [0,1].

        Deterministic in (config, seed, index, image); the returned float32
        arrays are bit-identical, pre-quantization, to the batch path for the
        same crop content and pair index.
        """
        arr = _validate_image(image)
        params = self.params_for(index)
        low, normal = _synthesize_pair_arrays(
            arr, params, self._bank, rerendered_gt=self._config.rerendered_gt
        )
        return low, normal, params


_BANK_BUILD_LOCK = Lock()


def synthesize_pair(handle: Generator, image, index: int):
    """Module-level convenience wrapper around Generator.synthesize_pair."""
    if not isinstance(handle, Generator):
        raise TypeError(f"expected a Generator handle, got {type(handle).__name__}")
    return handle.synthesize_pair(image, index)
