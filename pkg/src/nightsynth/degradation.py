"""Low-light degradation in the RAW domain: exposure reduction and sensor noise.

Noise is a single heteroscedastic Gaussian approximating shot + read noise:
variance = lambda_r + lambda_s * signal, applied after exposure reduction and
clipped afterwards so read noise can lift true blacks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BayerImage


@dataclass(frozen=True)
class NoiseModel:
    """Sampling model for the per-image noise gains.

    log(lambda_s) ~ U(log(lambda_s_min), log(lambda_s_max));
    log(lambda_r) | log(lambda_s) ~ N(a_r*log(lambda_s) + b_r, sigma_r).
    Gains are in normalized-intensity units. Shipped values live in the
    default config file and are overridable there.
    """

    lambda_s_min: float
    lambda_s_max: float
    a_r: float
    b_r: float
    sigma_r: float

    def __post_init__(self):
        # degenerate (min == max) is allowed and pins lambda_s to that value
        if not 0.0 < self.lambda_s_min <= self.lambda_s_max:
            raise ValueError(
                f"need 0 < lambda_s_min <= lambda_s_max, got "
                f"[{self.lambda_s_min}, {self.lambda_s_max}]"
            )
        if self.sigma_r < 0.0:
            raise ValueError(f"sigma_r must be >= 0, got {self.sigma_r}")

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModel":
        return cls(
            lambda_s_min=float(d["lambda_s_min"]),
            lambda_s_max=float(d["lambda_s_max"]),
            a_r=float(d["a_r"]),
            b_r=float(d["b_r"]),
            sigma_r=float(d["sigma_r"]),
        )


@dataclass(frozen=True)
class ExposureRange:
    """Exposure-reduction range in stops; degenerate (lo == hi) means constant e."""

    e_lo: float
    e_hi: float

    def __post_init__(self):
        if not (math.isfinite(self.e_lo) and math.isfinite(self.e_hi)):
            raise ValueError("exposure range must be finite")
        if self.e_hi < self.e_lo:
            raise ValueError(f"need e_hi >= e_lo, got [{self.e_lo}, {self.e_hi}]")


# Named presets: the shipped default plus the wider divisor ranges
# (divisor in [1, 2^k]  <=>  e in [0, k]).
EXPOSURE_PRESETS = {
    "default": ExposureRange(-0.5, 3.5),
    "stops-0-5": ExposureRange(0.0, 5.0),
    "stops-0-10": ExposureRange(0.0, 10.0),
    "stops-0-15": ExposureRange(0.0, 15.0),
    "stops-0-20": ExposureRange(0.0, 20.0),
}


def reduce_exposure(raw: BayerImage, e: float) -> BayerImage:
    """Divide every sample by 2^e (no clipping; values shrink for e > 0)."""
    if not math.isfinite(e):
        raise ValueError(f"exposure must be finite, got {e}")
    return BayerImage(raw.data / np.float32(2.0**e))


def sample_noise_gains(model: NoiseModel, rng: np.random.Generator):
    """Draw (lambda_s, lambda_r) from the log-uniform / conditional-normal model."""
    log_s = rng.uniform(math.log(model.lambda_s_min), math.log(model.lambda_s_max))
    log_r = model.a_r * log_s + model.b_r + model.sigma_r * rng.standard_normal()
    if model.lambda_s_min == model.lambda_s_max:
        # degenerate range: return the pinned value exactly, no log/exp drift
        return model.lambda_s_min, math.exp(log_r)
    return math.exp(log_s), math.exp(log_r)


def heteroscedastic_noise(
    data: np.ndarray, lambda_s: float, lambda_r: float, rng: np.random.Generator
) -> np.ndarray:
    """Signal plus N(0, lambda_r + lambda_s*signal) noise, unclipped (float32)."""
    if lambda_s < 0.0 or lambda_r < 0.0:
        raise ValueError(f"noise gains must be >= 0, got ({lambda_s}, {lambda_r})")
    data = np.asarray(data, dtype=np.float32)
    sigma = np.sqrt(lambda_r + lambda_s * data.astype(np.float64)).astype(np.float32)
    z = rng.standard_normal(size=data.shape, dtype=np.float32)
    return data + z * sigma


def add_noise(
    raw: BayerImage, lambda_s: float, lambda_r: float, rng: np.random.Generator
) -> BayerImage:
    """Apply heteroscedastic Gaussian noise to a non-negative mosaic, then clip.

    Samples may exceed 1 transiently (negative exposure stops brighten the
    mosaic before this stage); the final clip maps them to saturation, so
    clipping stays after noise injection.
    """
    lo = float(raw.data.min())
    if lo < 0.0:
        raise ValueError(f"add_noise input must be non-negative, got minimum {lo}")
    noisy = heteroscedastic_noise(raw.data, lambda_s, lambda_r, rng)
    return BayerImage(np.clip(noisy, 0.0, 1.0))


def degrade(
    raw: BayerImage,
    e: float,
    lambda_s: float,
    lambda_r: float,
    rng: np.random.Generator,
) -> BayerImage:
    """Exposure reduction followed by clipped sensor noise."""
    return add_noise(reduce_exposure(raw, e), lambda_s, lambda_r, rng)
