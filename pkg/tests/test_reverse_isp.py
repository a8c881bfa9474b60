import numpy as np
import pytest

from nightsynth import (
    CameraProfile,
    ColorState,
    ColorStateError,
    cst,
    inverse_cst,
    inverse_gamma,
    inverse_white_balance,
    invert_tone_curve,
    mosaic,
    demosaic,
    PlanarImage,
    ReverseParams,
    SingularMatrixError,
    tone_map,
    ToneCurve,
    unprocess,
)
from conftest import blurred_noise


def planar(value_or_array, state):
    arr = np.asarray(value_or_array, dtype=np.float32)
    if arr.ndim == 0:
        arr = np.full((2, 2, 3), float(arr), dtype=np.float32)
    return PlanarImage(arr, state)


class TestInverseGamma:
    def test_endpoints(self):
        out = inverse_gamma(planar(0.0, ColorState.SRGB_NONLINEAR))
        assert out.data[0, 0, 0] == 0.0
        out = inverse_gamma(planar(1.0, ColorState.SRGB_NONLINEAR))
        assert out.data[0, 0, 0] == pytest.approx(1.0, abs=1e-7)

    def test_half(self):
        # direct evaluation of ((0.5 + 0.055) / 1.055) ** 2.4
        expected = ((0.5 + 0.055) / 1.055) ** 2.4
        out = inverse_gamma(planar(0.5, ColorState.SRGB_NONLINEAR))
        assert out.data[0, 0, 0] == pytest.approx(expected, abs=1e-7)
        assert out.data[0, 0, 0] == pytest.approx(0.21404, abs=1e-5)

    def test_output_state(self):
        out = inverse_gamma(planar(0.3, ColorState.SRGB_NONLINEAR))
        assert out.state is ColorState.SRGB_LINEAR

    def test_wrong_state(self):
        with pytest.raises(ColorStateError):
            inverse_gamma(planar(0.3, ColorState.SRGB_LINEAR))


class TestInvertToneCurve:
    def test_identity_curve(self):
        out = invert_tone_curve(
            planar(0.37, ColorState.SRGB_LINEAR), ToneCurve.identity(256)
        )
        assert out.data[0, 0, 0] == pytest.approx(0.37, abs=1e-6)

    def test_square_curve(self):
        # analytic inverse of t = x^2 at 0.25 is 0.5
        t = np.linspace(0, 1, 256) ** 2
        curve = ToneCurve(np.stack([t, t, t]))
        out = invert_tone_curve(planar(0.25, ColorState.SRGB_LINEAR), curve)
        assert out.data[0, 0, 0] == pytest.approx(0.5, abs=1e-4)

    def test_left_endpoint(self):
        # t[0] = 0.125 is exactly representable in float32, so the query hits it
        t = 0.125 + 0.875 * np.linspace(0, 1, 64)
        curve = ToneCurve(np.stack([t, t, t]))
        out = invert_tone_curve(planar(0.125, ColorState.SRGB_LINEAR), curve)
        assert out.data[0, 0, 0] == 0.0

    def test_interp_of_inverse_is_identity(self, default_bank):
        # |Interp(invert(x), curve) - x| <= 1e-5 on the grid, for bank curves
        grid = np.linspace(0, 1, 257)
        img = PlanarImage(
            np.repeat(grid.reshape(1, -1)[..., None], 3, axis=2).astype(np.float32),
            ColorState.SRGB_LINEAR,
        )
        for curve in [default_bank.tone_curves[i] for i in (0, 57, 123, 199)]:
            inv = invert_tone_curve(img, curve)
            fwd = tone_map(PlanarImage(inv.data, ColorState.CIE_XYZ), curve)
            # bank curves span [0,1], so every grid point is invertible
            assert np.max(np.abs(fwd.data - img.data)) <= 1e-5


def random_invertible_profile(rng):
    while True:
        m = rng.uniform(-0.3, 1.3, size=(3, 3)) + np.eye(3)
        if np.all(np.abs(m.sum(axis=1)) > 0.3) and abs(np.linalg.det(m)) > 0.1:
            return CameraProfile("rand", m, m + rng.uniform(-0.05, 0.05, size=(3, 3)))


class TestInverseCst:
    def test_identity_matrices(self, identity_profile):
        img = planar(0.4, ColorState.CIE_XYZ)
        out = inverse_cst(img, identity_profile, 0.7)
        assert np.allclose(out.data, 0.4, atol=1e-7)
        assert out.state is ColorState.CAMERA_RGB

    def test_blend_endpoint_uses_ccm_low(self):
        low = np.array([[0.7, 0.2, 0.1], [0.1, 0.8, 0.1], [0.2, 0.2, 0.6]])
        p = CameraProfile("t", low, np.eye(3))
        v = np.array([0.2, 0.5, 0.3])
        img = PlanarImage(np.tile(v, (2, 2, 1)).astype(np.float32), ColorState.CIE_XYZ)
        out = inverse_cst(img, p, 1.0)
        expected = np.linalg.inv(p.ccm_low) @ v
        assert np.allclose(out.data[0, 0], expected, atol=1e-6)

    def test_round_trip_random_profiles(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            p = random_invertible_profile(rng)
            g = float(rng.uniform())
            x = rng.uniform(0, 1, size=(6, 6, 3)).astype(np.float32)
            img = PlanarImage(x, ColorState.CAMERA_RGB)
            back = inverse_cst(cst(img, p, g), p, g)
            assert np.max(np.abs(back.data - x)) <= 1e-5

    def test_round_trip_all_bank_profiles(self, default_bank):
        # identity within 1e-5 for every loaded profile across 100 blend draws
        rng = np.random.default_rng(13)
        x = rng.uniform(0, 1, size=(4, 4, 3)).astype(np.float32)
        img = PlanarImage(x, ColorState.CAMERA_RGB)
        gs = rng.uniform(0, 1, size=100)
        for p in default_bank.profiles:
            for g in gs:
                back = inverse_cst(cst(img, p, float(g)), p, float(g))
                assert np.max(np.abs(back.data - x)) <= 1e-5

    def test_singular_blend_reports_profile_and_g(self):
        # endpoints are invertible but their g=0.5 blend is singular
        low = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        high = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        p = CameraProfile("swap", low, high)
        img = planar(0.5, ColorState.CIE_XYZ)
        with pytest.raises(SingularMatrixError, match=r"swap.*g=0.5"):
            inverse_cst(img, p, 0.5)


class TestInverseWhiteBalance:
    def test_unit_gains_identity(self):
        img = planar(0.77, ColorState.CAMERA_RGB)
        out = inverse_white_balance(img, (1.0, 1.0, 1.0))
        assert np.allclose(out.data, 0.77, atol=1e-7)

    def test_plain_division_region(self):
        data = np.full((2, 2, 3), 0.4, dtype=np.float32)
        out = inverse_white_balance(
            PlanarImage(data, ColorState.CAMERA_RGB), (2.0, 1.0, 1.0)
        )
        assert out.data[0, 0, 0] == pytest.approx(0.2, abs=1e-7)
        assert out.data[0, 0, 1] == pytest.approx(0.4, abs=1e-7)

    def test_white_preserved(self):
        # at x = 1 the ramp weight is 1 so the divisor collapses to 1
        data = np.full((2, 2, 3), 1.0, dtype=np.float32)
        out = inverse_white_balance(
            PlanarImage(data, ColorState.CAMERA_RGB), (2.0, 1.0, 1.0)
        )
        assert out.data[0, 0, 0] == pytest.approx(1.0, abs=1e-7)

    def test_ramp_interpolates(self):
        # midway into the ramp: alpha = 0.25, divisor = 0.75*2 + 0.25 = 1.75
        data = np.full((2, 2, 3), 0.95, dtype=np.float32)
        out = inverse_white_balance(
            PlanarImage(data, ColorState.CAMERA_RGB), (2.0, 1.0, 1.0)
        )
        assert out.data[0, 0, 0] == pytest.approx(0.95 / 1.75, abs=1e-6)

    def test_nonpositive_gain_rejected(self):
        img = planar(0.5, ColorState.CAMERA_RGB)
        with pytest.raises(ValueError, match="positive"):
            inverse_white_balance(img, (0.0, 1.0, 1.0))


class TestMosaic:
    def test_constant_gray(self):
        img = planar(0.3, ColorState.CAMERA_RGB)
        out = mosaic(img)
        assert np.allclose(out.data, 0.3)

    def test_pure_red(self):
        data = np.zeros((4, 4, 3), dtype=np.float32)
        data[..., 0] = 1.0
        out = mosaic(PlanarImage(data, ColorState.CAMERA_RGB))
        assert np.all(out.data[0::2, 0::2] == 1.0)
        assert np.all(out.data[0::2, 1::2] == 0.0)
        assert np.all(out.data[1::2, :] == 0.0)

    def test_odd_dims_rejected(self):
        img = PlanarImage(np.zeros((5, 4, 3)), ColorState.CAMERA_RGB)
        with pytest.raises(ValueError, match="even"):
            mosaic(img)

    def test_demosaic_round_trip_smooth(self):
        # sigma-4 blurred noise: interior max err <= 2/255, 2-pixel border excluded
        rng = np.random.default_rng(5)
        for _ in range(3):
            x = blurred_noise(rng, 64, sigma=4.0)
            img = PlanarImage(x, ColorState.CAMERA_RGB)
            back = demosaic(mosaic(img))
            err = np.abs(back.data.astype(np.float64) - x)[2:-2, 2:-2]
            assert err.max() <= 2.0 / 255.0

    def test_mosaic_of_demosaic_preserves_samples(self):
        rng = np.random.default_rng(9)
        from nightsynth import BayerImage

        b = BayerImage(rng.random((12, 12)).astype(np.float32))
        again = mosaic(demosaic(b))
        assert np.array_equal(again.data, b.data)


class TestUnprocess:
    def test_identity_params_collapse(self, identity_profile, identity_curve):
        rng = np.random.default_rng(2)
        x = rng.uniform(0, 1, size=(8, 8, 3)).astype(np.float32)
        img = PlanarImage(x, ColorState.SRGB_NONLINEAR)
        params = ReverseParams(
            tone_curve=identity_curve,
            profile=identity_profile,
            blend_g=0.5,
            wb_gains=(1.0, 1.0, 1.0),
        )
        out = unprocess(img, params)
        from nightsynth import clip01, inverse_gamma

        expected = clip01(mosaic(PlanarImage(inverse_gamma(img).data, ColorState.CAMERA_RGB)))
        assert np.allclose(out.data, expected.data, atol=2e-7)

    def test_black_maps_to_black(self, identity_profile, identity_curve):
        img = planar(0.0, ColorState.SRGB_NONLINEAR)
        params = ReverseParams(
            tone_curve=identity_curve,
            profile=identity_profile,
            blend_g=0.0,
            wb_gains=(2.0, 1.5, 1.0),
        )
        assert np.all(unprocess(img, params).data == 0.0)

    def test_output_in_unit_interval(self, small_bank):
        rng = np.random.default_rng(21)
        x = rng.uniform(0, 1, size=(16, 16, 3)).astype(np.float32)
        img = PlanarImage(x, ColorState.SRGB_NONLINEAR)
        params = ReverseParams(
            tone_curve=small_bank.tone_curves[3],
            profile=small_bank.profiles[7],
            blend_g=0.3,
            wb_gains=(3.2, 1.4, 1.0),
        )
        out = unprocess(img, params)
        assert out.data.min() >= 0.0 and out.data.max() <= 1.0

    def test_param_validation(self, identity_profile, identity_curve):
        with pytest.raises(ValueError):
            ReverseParams(identity_curve, identity_profile, 1.5, (1, 1, 1))
        with pytest.raises(ValueError):
            ReverseParams(identity_curve, identity_profile, 0.5, (1, -1, 1))
