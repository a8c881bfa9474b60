"""Image containers, color-state bookkeeping, and the numeric conventions shared by all stages.

Pixel data is 32-bit float normalized to [0, 1]; integer I/O is converted by x/255 or
x/65535 on ingest. Containers copy and freeze their buffers on construction, so stages
can be composed and parallelized without defensive copies.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

# BT.601 full-range luma weights (used for all Y-channel statistics).
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

# sRGB transfer-curve constants: gamma 2.4, offset a = 0.055.
SRGB_GAMMA = 2.4
SRGB_A = 0.055
SRGB_LINEAR_KNEE = 0.0031308  # linear-domain branch point
SRGB_ENCODED_KNEE = 0.04045   # encoded-domain branch point (12.92 * knee)

CCM_DET_EPS = 1e-8


class ColorState(Enum):
    """Color space / encoding a PlanarImage is currently in."""

    SRGB_NONLINEAR = "srgb-nonlinear"
    SRGB_LINEAR = "srgb-linear"
    CIE_XYZ = "cie-xyz"
    CAMERA_RGB = "camera-rgb"


class PipelineError(Exception):
    """Base class for synthesis pipeline errors."""


class ColorStateError(PipelineError):
    """A stage was applied to an image in the wrong color state."""


class NonFiniteSampleError(PipelineError):
    """A NaN or Inf sample was found where finite data is required."""


class SingularMatrixError(PipelineError):
    """A (blended) color matrix is numerically singular."""


class AssetBankError(PipelineError):
    """Asset bank is missing, inconsistent, or does not match a manifest."""


class IngestError(PipelineError):
    """An input image could not be read in the required format."""


_PLANE_NAMES = ("R", "G", "B")


def _raise_nonfinite(arr: np.ndarray, single_plane: bool) -> None:
    idx = np.argwhere(~np.isfinite(arr))[0]
    if single_plane:
        raise NonFiniteSampleError(
            f"non-finite sample in plane mosaic at ({idx[0]}, {idx[1]})"
        )
    plane = _PLANE_NAMES[idx[2]]
    raise NonFiniteSampleError(
        f"non-finite sample in plane {plane} at ({idx[0]}, {idx[1]})"
    )


def _check_finite(arr: np.ndarray, single_plane: bool) -> None:
    if not np.isfinite(arr).all():
        _raise_nonfinite(arr, single_plane)


def require_state(img: "PlanarImage", state: ColorState) -> None:
    if img.state is not state:
        raise ColorStateError(
            f"expected image in state {state.value}, got {img.state.value}"
        )


@dataclass(frozen=True)
class PlanarImage:
    """H x W x 3 float32 image in a declared color state.

    The buffer is copied and made read-only on construction; stages always
    produce new instances, never mutate.
    """

    data: np.ndarray
    state: ColorState

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float32, copy=True, order="C")
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected an HxWx3 array, got shape {arr.shape}")
        _check_finite(arr, single_plane=False)
        if self.state is ColorState.SRGB_NONLINEAR:
            lo = float(arr.min()) if arr.size else 0.0
            hi = float(arr.max()) if arr.size else 0.0
            if lo < 0.0 or hi > 1.0:
                raise ValueError(
                    f"sRGB-nonlinear samples must lie in [0,1], got range [{lo}, {hi}]"
                )
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class BayerImage:
    """H x W single-plane RGGB mosaic (linear camera RGB), float32.

    Per 2x2 tile: (0,0)=R, (0,1)=G, (1,0)=G, (1,1)=B. Dimensions must be even.
    Values may exceed [0,1] transiently; clipping stages restore the range.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float32, copy=True, order="C")
        if arr.ndim != 2:
            raise ValueError(f"expected an HxW array, got shape {arr.shape}")
        h, w = arr.shape
        if h % 2 or w % 2:
            raise ValueError(f"Bayer dimensions must be even, got {h}x{w}")
        _check_finite(arr, single_plane=True)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class CameraProfile:
    """Factory color calibration: a pair of camera->XYZ CCMs at warm/cool illuminants.

    `ccm_low` is the 2500K endpoint, `ccm_high` the 6500K endpoint. Rows are
    normalized to sum to 1 at load so neutral inputs stay neutral ahead of
    white balance, and both endpoints must be invertible.
    """

    id: str
    ccm_low: np.ndarray
    ccm_high: np.ndarray

    def __post_init__(self):
        for name in ("ccm_low", "ccm_high"):
            m = np.array(getattr(self, name), dtype=np.float64, copy=True)
            if m.shape != (3, 3):
                raise ValueError(f"{name} of profile {self.id!r} must be 3x3")
            if not np.isfinite(m).all():
                raise ValueError(f"{name} of profile {self.id!r} has non-finite entries")
            sums = m.sum(axis=1)
            if np.any(np.abs(sums) < 1e-6):
                raise ValueError(
                    f"{name} of profile {self.id!r} has a near-zero row sum"
                )
            m /= sums[:, None]
            if abs(np.linalg.det(m)) <= CCM_DET_EPS:
                raise SingularMatrixError(
                    f"{name} of profile {self.id!r} is singular after row normalization"
                )
            m.setflags(write=False)
            object.__setattr__(self, name, m)

    def blended(self, g: float) -> np.ndarray:
        """Blend the two calibration endpoints: g=1 -> 2500K matrix, g=0 -> 6500K."""
        if not 0.0 <= g <= 1.0:
            raise ValueError(f"blend weight must be in [0,1], got {g}")
        return g * self.ccm_low + (1.0 - g) * self.ccm_high


@dataclass(frozen=True)
class ToneCurve:
    """Per-channel monotone 1D LUT sampled on a uniform grid over [0, 1].

    `samples` has shape (3, n) with n >= 16; each channel must be strictly
    increasing with samples[c, 0] >= 0 and samples[c, -1] <= 1, which keeps
    the curve invertible by per-segment linear inversion.
    """

    samples: np.ndarray

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[0] != 3:
            raise ValueError(f"tone curve samples must be (3, n), got {arr.shape}")
        if arr.shape[1] < 16:
            raise ValueError(f"tone curve needs at least 16 samples, got {arr.shape[1]}")
        if not np.isfinite(arr).all():
            raise ValueError("tone curve has non-finite samples")
        if np.any(np.diff(arr, axis=1) <= 0.0):
            raise ValueError("tone curve must be strictly increasing per channel")
        if np.any(arr[:, 0] < 0.0) or np.any(arr[:, -1] > 1.0):
            raise ValueError("tone curve endpoints must satisfy t[0] >= 0 and t[-1] <= 1")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n)

    @classmethod
    def identity(cls, n: int = 256) -> "ToneCurve":
        t = np.linspace(0.0, 1.0, n)
        return cls(np.stack([t, t, t]))


def srgb_encode(x: np.ndarray) -> np.ndarray:
    """Linear -> sRGB transfer curve: 12.92x below the knee, else the power law.

    Dtype-preserving for float input (float32 pipeline data stays float32);
    other input becomes float64.
    """
    x = np.asarray(x)
    if x.dtype not in (np.float32, np.float64):
        x = x.astype(np.float64)
    return np.where(
        x <= SRGB_LINEAR_KNEE,
        12.92 * x,
        (1.0 + SRGB_A) * np.power(np.maximum(x, SRGB_LINEAR_KNEE), 1.0 / SRGB_GAMMA) - SRGB_A,
    ).astype(x.dtype)


def srgb_decode(x: np.ndarray) -> np.ndarray:
    """sRGB -> linear transfer curve, exact inverse of srgb_encode (dtype-preserving)."""
    x = np.asarray(x)
    if x.dtype not in (np.float32, np.float64):
        x = x.astype(np.float64)
    return np.where(
        x <= SRGB_ENCODED_KNEE,
        x / 12.92,
        np.power((np.maximum(x, 0.0) + SRGB_A) / (1.0 + SRGB_A), SRGB_GAMMA),
    ).astype(x.dtype)


def clip01(img):
    """Clamp every sample to [0, 1]; idempotent.

    Accepts a PlanarImage, a BayerImage, or a bare ndarray and returns the same
    type. Non-finite input raises NonFiniteSampleError identifying the plane
    and index of the first offender.
    """
    if isinstance(img, PlanarImage):
        return PlanarImage(np.clip(img.data, 0.0, 1.0), img.state)
    if isinstance(img, BayerImage):
        return BayerImage(np.clip(img.data, 0.0, 1.0))
    arr = np.asarray(img)
    _check_finite(arr, single_plane=arr.ndim != 3)
    return np.clip(arr, 0.0, 1.0)


def rgb_to_y(img: PlanarImage) -> np.ndarray:
    """BT.601 full-range luma of an sRGB-nonlinear image, as an HxW float32 plane."""
    require_state(img, ColorState.SRGB_NONLINEAR)
    w = np.asarray(LUMA_WEIGHTS, dtype=np.float64)
    y = img.data.astype(np.float64) @ w
    return y.astype(np.float32)
