"""In-memory pair synthesis: one normal-light array in, one (low, normal) pair out.

This is the single code path behind the batch generator, manifest replay, and
the dataloader bindings, so bit parity between them holds by construction.
"""

from __future__ import annotations

import numpy as np

from .bank import AssetBank
from .core import ColorState, PlanarImage
from .degradation import degrade
from .forward_isp import process
from .reverse_isp import unprocess
from .sampling import SampledParams, rng_from_seed


def synthesize_pair(
    image: np.ndarray,
    params: SampledParams,
    bank: AssetBank,
    rerendered_gt: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Synthesize a (low, normal) float32 pair from an sRGB array in [0, 1].

    The low-light input is process(degrade(unprocess(image))); the normal
    target is the untouched input, or its identity-degradation re-render when
    rerendered_gt is set. Same (image, params, bank) always yields bit-identical
    output.
    """
    img = PlanarImage(image, ColorState.SRGB_NONLINEAR)
    raw = unprocess(img, params.reverse_params(bank))
    raw_low = degrade(raw, params.e, params.lambda_s, params.lambda_r, rng_from_seed(params.seed))
    low = process(raw_low, params.forward_params(bank))
    if rerendered_gt:
        normal = process(unprocess(img, params.reverse_params(bank)), params.forward_params(bank)).data
    else:
        normal = img.data
    return low.data, normal
