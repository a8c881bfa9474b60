"""Unprocessing: analytic inversion of the forward rendering chain, ending in an RGGB mosaic.

Stage order is the exact reverse of the forward pipeline: gamma expansion, tone-curve
inversion, inverse color-space transform, inverse white balance, mosaic, clip.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    BayerImage,
    CameraProfile,
    CCM_DET_EPS,
    clip01,
    ColorState,
    PlanarImage,
    require_state,
    SingularMatrixError,
    srgb_decode,
    ToneCurve,
)

# Highlight-preserving white-balance ramp: above this input level the effective
# gain blends quadratically toward 1 so saturated pixels are neither dimmed nor
# blown out. Shared by the forward and inverse stages.
WB_RAMP_START = 0.9


@dataclass(frozen=True)
class ReverseParams:
    """One unprocessing draw: tone curve, camera profile, CCM blend, WB gains."""

    tone_curve: ToneCurve
    profile: CameraProfile
    blend_g: float
    wb_gains: tuple[float, float, float]

    def __post_init__(self):
        if not 0.0 <= self.blend_g <= 1.0:
            raise ValueError(f"blend_g must be in [0,1], got {self.blend_g}")
        if any(g <= 0.0 for g in self.wb_gains):
            raise ValueError(f"white-balance gains must be positive, got {self.wb_gains}")


def inverse_gamma(img: PlanarImage) -> PlanarImage:
    """Expand sRGB-encoded samples back to linear light."""
    require_state(img, ColorState.SRGB_NONLINEAR)
    return PlanarImage(srgb_decode(img.data), ColorState.SRGB_LINEAR)


def invert_tone_curve(img: PlanarImage, curve: ToneCurve) -> PlanarImage:
    """Invert a per-channel piecewise-linear tone curve.

    For each channel the output v satisfies Interp(v, curve) == input within
    interpolation tolerance; inputs outside [t[0], t[-1]] clamp to the grid
    endpoints. Non-monotone curves are rejected at ToneCurve construction.
    """
    require_state(img, ColorState.SRGB_LINEAR)
    grid = curve.grid
    data = img.data.astype(np.float64)
    out = np.empty_like(data)
    for c in range(3):
        out[..., c] = np.interp(data[..., c], curve.samples[c], grid)
    return PlanarImage(out, ColorState.CIE_XYZ)


def blended_ccm_inverse(profile: CameraProfile, blend_g: float) -> np.ndarray:
    """Inverse of the blended CCM, guarding against near-singular blends."""
    ccm = profile.blended(blend_g)
    det = float(np.linalg.det(ccm))
    if abs(det) < CCM_DET_EPS:
        raise SingularMatrixError(
            f"blended CCM of profile {profile.id!r} at g={blend_g} is singular"
        )
    return np.linalg.inv(ccm)


def inverse_cst(img: PlanarImage, profile: CameraProfile, blend_g: float) -> PlanarImage:
    """Map the post-CCM (CIE-XYZ labelled) image back to camera RGB."""
    require_state(img, ColorState.CIE_XYZ)
    inv = blended_ccm_inverse(profile, blend_g)
    out = img.data.astype(np.float64) @ inv.T
    return PlanarImage(out, ColorState.CAMERA_RGB)


def _wb_ramp_weight(x: np.ndarray) -> np.ndarray:
    # Quadratic blend weight, 0 below the ramp start and 1 at (or above) white.
    alpha = (np.maximum(x - WB_RAMP_START, 0.0) / (1.0 - WB_RAMP_START)) ** 2
    return np.minimum(alpha, 1.0)


def _wb_effective_gains(data: np.ndarray, gains) -> np.ndarray:
    # Per-sample effective gain: plain gain for w <= 1, ramped toward 1 near
    # white for w > 1.
    w = np.asarray(gains, dtype=data.dtype)
    alpha = _wb_ramp_weight(data)
    return np.where(w > 1.0, (1.0 - alpha) * w + alpha, w)


def inverse_white_balance(
    img: PlanarImage, gains: tuple[float, float, float]
) -> PlanarImage:
    """Divide channels by the WB gains, easing the divisor toward 1 near white.

    For a gain w > 1 the effective divisor is (1-alpha)*w + alpha with
    alpha = ((x - 0.9)+ / 0.1)^2, so saturated samples are left untouched.
    """
    require_state(img, ColorState.CAMERA_RGB)
    if any(g <= 0.0 for g in gains):
        raise ValueError(f"white-balance gains must be positive, got {gains}")
    data = img.data
    return PlanarImage(data / _wb_effective_gains(data, gains), ColorState.CAMERA_RGB)


def mosaic(img: PlanarImage) -> BayerImage:
    """Subsample camera RGB onto the RGGB grid (lossy by construction)."""
    require_state(img, ColorState.CAMERA_RGB)
    h, w = img.height, img.width
    if h % 2 or w % 2:
        raise ValueError(f"mosaic requires even dimensions, got {h}x{w}")
    data = img.data
    out = np.empty((h, w), dtype=np.float32)
    out[0::2, 0::2] = data[0::2, 0::2, 0]
    out[0::2, 1::2] = data[0::2, 1::2, 1]
    out[1::2, 0::2] = data[1::2, 0::2, 1]
    out[1::2, 1::2] = data[1::2, 1::2, 2]
    return BayerImage(out)


def unprocess(img: PlanarImage, params: ReverseParams) -> BayerImage:
    """Full unprocessing chain from sRGB to a clipped RAW mosaic."""
    x = inverse_gamma(img)
    x = invert_tone_curve(x, params.tone_curve)
    x = inverse_cst(x, params.profile, params.blend_g)
    x = inverse_white_balance(x, params.wb_gains)
    return clip01(mosaic(x))
