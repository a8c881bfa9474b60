import numpy as np
import pytest
from scipy import ndimage

from nightsynth import build_default_bank, CameraProfile, ToneCurve


@pytest.fixture(scope="session")
def default_bank(tmp_path_factory):
    """Full-size default bank (11 profiles, 200 curves) shared across the session."""
    return build_default_bank(tmp_path_factory.mktemp("bank_full"), n_curves=200)


@pytest.fixture(scope="session")
def small_bank(tmp_path_factory):
    return build_default_bank(tmp_path_factory.mktemp("bank_small"), n_curves=12)


@pytest.fixture
def identity_profile():
    return CameraProfile("identity", np.eye(3), np.eye(3))


@pytest.fixture
def identity_curve():
    return ToneCurve.identity(256)


def blurred_noise(rng, size, sigma, channels=3):
    """Gaussian-blurred uniform noise in [0,1], the standard smooth test image."""
    shape = (size, size, channels) if channels else (size, size)
    x = rng.random(shape)
    if channels:
        for c in range(channels):
            x[..., c] = ndimage.gaussian_filter(x[..., c], sigma)
    else:
        x = ndimage.gaussian_filter(x, sigma)
    return np.clip(x, 0.0, 1.0).astype(np.float32)
