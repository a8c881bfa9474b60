"""Forward rendering: RAW mosaic to sRGB through demosaic, WB, CCM, tone map, gamma.

Demosaicing uses the gradient-corrected 5x5 linear filters (1/8 normalization)
with 2-pixel symmetric reflection at the borders; known Bayer samples pass
through untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import (
    BayerImage,
    CameraProfile,
    clip01,
    ColorState,
    PlanarImage,
    require_state,
    srgb_encode,
    ToneCurve,
)
from .reverse_isp import _wb_effective_gains

# Gradient-corrected demosaic kernels, in units of 1/8. K_G estimates green at
# red/blue sites; K_RB_H estimates red/blue at a green site whose same-row
# neighbors carry that color; K_RB_V is its transpose; K_RB_X estimates
# red-at-blue / blue-at-red across the diagonal checker.
K_G = np.array(
    [
        [0, 0, -1, 0, 0],
        [0, 0, 2, 0, 0],
        [-1, 2, 4, 2, -1],
        [0, 0, 2, 0, 0],
        [0, 0, -1, 0, 0],
    ],
    dtype=np.float64,
) / 8.0

K_RB_H = np.array(
    [
        [0, 0, 0.5, 0, 0],
        [0, -1, 0, -1, 0],
        [-1, 4, 5, 4, -1],
        [0, -1, 0, -1, 0],
        [0, 0, 0.5, 0, 0],
    ],
    dtype=np.float64,
) / 8.0

K_RB_V = K_RB_H.T.copy()

K_RB_X = np.array(
    [
        [0, 0, -1.5, 0, 0],
        [0, 2, 0, 2, 0],
        [-1.5, 0, 6, 0, -1.5],
        [0, 2, 0, 2, 0],
        [0, 0, -1.5, 0, 0],
    ],
    dtype=np.float64,
) / 8.0


@dataclass(frozen=True)
class ForwardParams:
    """One forward-render draw: WB gains, camera profile, CCM blend, tone curve."""

    wb_gains: tuple[float, float, float]
    profile: CameraProfile
    blend_g: float
    tone_curve: ToneCurve

    def __post_init__(self):
        if not 0.0 <= self.blend_g <= 1.0:
            raise ValueError(f"blend_g must be in [0,1], got {self.blend_g}")
        if any(g <= 0.0 for g in self.wb_gains):
            raise ValueError(f"white-balance gains must be positive, got {self.wb_gains}")


def _site_masks(h: int, w: int):
    rows = np.arange(h)[:, None]
    cols = np.arange(w)[None, :]
    even_r, even_c = rows % 2 == 0, cols % 2 == 0
    r_mask = even_r & even_c
    g1_mask = even_r & ~even_c  # green in a red row
    g2_mask = ~even_r & even_c  # green in a blue row
    b_mask = ~even_r & ~even_c
    return r_mask, g1_mask, g2_mask, b_mask


def demosaic(raw: BayerImage) -> PlanarImage:
    """Interpolate the two missing colors per site with the 5x5 corrected filters."""
    x = raw.data.astype(np.float64)
    h, w = x.shape
    conv_g = ndimage.convolve(x, K_G, mode="reflect")
    conv_h = ndimage.convolve(x, K_RB_H, mode="reflect")
    conv_v = ndimage.convolve(x, K_RB_V, mode="reflect")
    conv_x = ndimage.convolve(x, K_RB_X, mode="reflect")

    r_mask, g1_mask, g2_mask, b_mask = _site_masks(h, w)
    g = np.where(r_mask | b_mask, conv_g, x)
    r = np.select([r_mask, g1_mask, g2_mask], [x, conv_h, conv_v], default=conv_x)
    b = np.select([b_mask, g2_mask, g1_mask], [x, conv_h, conv_v], default=conv_x)
    return PlanarImage(np.stack([r, g, b], axis=-1), ColorState.CAMERA_RGB)


def white_balance(img: PlanarImage, gains: tuple[float, float, float]) -> PlanarImage:
    """Multiply channels by the WB gains with the highlight-preserving ramp, then clip.

    Exact forward counterpart of the inverse stage: for a gain w > 1 the
    effective multiplier blends from w down to 1 as the sample approaches 1.
    """
    require_state(img, ColorState.CAMERA_RGB)
    if any(g <= 0.0 for g in gains):
        raise ValueError(f"white-balance gains must be positive, got {gains}")
    data = img.data
    out = data * _wb_effective_gains(data, gains)
    return PlanarImage(np.clip(out, 0.0, 1.0), ColorState.CAMERA_RGB)


def sample_wb_gains(rng: np.random.Generator, reference: str = "blue"):
    """Draw white-balance gains: two channels ~ 1.2 + 2*U(0,1), reference fixed at 1.

    reference="blue" leaves w_b = 1 (the shipped default); "green" is the
    conventional variant with w_g = 1.
    """
    u1 = float(rng.uniform())
    u2 = float(rng.uniform())
    a, b = 1.2 + 2.0 * u1, 1.2 + 2.0 * u2
    if reference == "blue":
        return (a, b, 1.0)
    if reference == "green":
        return (a, 1.0, b)
    raise ValueError(f"unknown wb reference channel {reference!r}")


def cst(img: PlanarImage, profile: CameraProfile, blend_g: float) -> PlanarImage:
    """Apply the blended camera->XYZ color correction matrix."""
    require_state(img, ColorState.CAMERA_RGB)
    ccm = profile.blended(blend_g)
    out = img.data.astype(np.float64) @ ccm.T
    return PlanarImage(out, ColorState.CIE_XYZ)


def _interp_uniform(x: np.ndarray, t: np.ndarray) -> np.ndarray:
    # Piecewise-linear interpolation of samples t on the uniform grid over
    # [0,1]; no binary search needed. Requires x in [0,1].
    n = t.size
    pos = x * (n - 1)
    idx = np.minimum(pos.astype(np.int64), n - 2)
    frac = pos - idx
    return t[idx] * (1.0 - frac) + t[idx + 1] * frac


def tone_map(img: PlanarImage, curve: ToneCurve) -> PlanarImage:
    """Per-channel piecewise-linear tone mapping through the sampled curve."""
    require_state(img, ColorState.CIE_XYZ)
    data = img.data
    lo, hi = float(data.min()), float(data.max())
    if lo < 0.0 or hi > 1.0:
        raise ValueError(
            f"tone_map input must be clipped to [0,1] first, got range [{lo}, {hi}]"
        )
    out = np.empty(data.shape, dtype=np.float64)
    for c in range(3):
        out[..., c] = _interp_uniform(data[..., c].astype(np.float64), curve.samples[c])
    return PlanarImage(out, ColorState.SRGB_LINEAR)


def gamma_correct(img: PlanarImage) -> PlanarImage:
    """Encode linear samples with the sRGB transfer curve."""
    require_state(img, ColorState.SRGB_LINEAR)
    out = np.clip(srgb_encode(img.data), 0.0, 1.0)
    return PlanarImage(out, ColorState.SRGB_NONLINEAR)


def process(raw: BayerImage, params: ForwardParams) -> PlanarImage:
    """Full forward render: demosaic -> WB -> CCM -> clip -> tone map -> gamma."""
    x = demosaic(raw)
    x = white_balance(x, params.wb_gains)
    x = cst(x, params.profile, params.blend_g)
    x = clip01(x)
    x = tone_map(x, params.tone_curve)
    return gamma_correct(x)
