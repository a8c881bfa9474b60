import numpy as np
import pytest

from nightsynth import (
    BayerImage,
    CameraProfile,
    clip01,
    ColorState,
    ColorStateError,
    NonFiniteSampleError,
    PlanarImage,
    rgb_to_y,
    SingularMatrixError,
    ToneCurve,
)


class TestClip01:
    def test_clamp_upper(self):
        assert clip01(np.array([1.3])) == pytest.approx(1.0)

    def test_clamp_lower(self):
        assert clip01(np.array([-0.2])) == pytest.approx(0.0)

    def test_identity_inside_range(self):
        assert clip01(np.array([0.5])) == pytest.approx(0.5)

    def test_idempotent_exact(self):
        rng = np.random.default_rng(0)
        x = rng.normal(0.5, 1.0, size=(33, 17, 3)).astype(np.float32)
        once = clip01(x)
        assert np.array_equal(clip01(once), once)

    def test_planar_image_roundtrip(self):
        img = PlanarImage(np.full((4, 4, 3), 2.0), ColorState.CAMERA_RGB)
        out = clip01(img)
        assert isinstance(out, PlanarImage)
        assert out.state is ColorState.CAMERA_RGB
        assert np.all(out.data == 1.0)

    def test_bayer_roundtrip(self):
        out = clip01(BayerImage(np.full((4, 4), -1.0)))
        assert isinstance(out, BayerImage)
        assert np.all(out.data == 0.0)

    def test_nonfinite_names_plane_and_index(self):
        x = np.zeros((4, 4, 3), dtype=np.float32)
        x[2, 3, 1] = np.nan
        with pytest.raises(NonFiniteSampleError, match=r"plane G at \(2, 3\)"):
            clip01(x)

    def test_nonfinite_mosaic(self):
        x = np.zeros((4, 4), dtype=np.float32)
        x[1, 0] = np.inf
        with pytest.raises(NonFiniteSampleError, match=r"plane mosaic at \(1, 0\)"):
            clip01(x)


class TestRgbToY:
    def test_white_is_one(self):
        img = PlanarImage(np.ones((2, 2, 3)), ColorState.SRGB_NONLINEAR)
        assert rgb_to_y(img)[0, 0] == pytest.approx(1.0, abs=1e-7)

    def test_black_is_zero(self):
        img = PlanarImage(np.zeros((2, 2, 3)), ColorState.SRGB_NONLINEAR)
        assert rgb_to_y(img)[0, 0] == 0.0

    def test_pure_red_weight(self):
        data = np.zeros((2, 2, 3), dtype=np.float32)
        data[..., 0] = 1.0
        img = PlanarImage(data, ColorState.SRGB_NONLINEAR)
        assert rgb_to_y(img)[0, 0] == pytest.approx(0.299, abs=1e-7)

    def test_wrong_state_rejected(self):
        img = PlanarImage(np.ones((2, 2, 3)), ColorState.SRGB_LINEAR)
        with pytest.raises(ColorStateError):
            rgb_to_y(img)


class TestContainers:
    def test_planar_rejects_nan(self):
        x = np.zeros((2, 2, 3))
        x[0, 1, 2] = np.nan
        with pytest.raises(NonFiniteSampleError, match=r"plane B at \(0, 1\)"):
            PlanarImage(x, ColorState.CAMERA_RGB)

    def test_srgb_nonlinear_range_enforced(self):
        with pytest.raises(ValueError, match="lie in"):
            PlanarImage(np.full((2, 2, 3), 1.5), ColorState.SRGB_NONLINEAR)

    def test_linear_states_may_exceed_one(self):
        img = PlanarImage(np.full((2, 2, 3), 1.5), ColorState.CAMERA_RGB)
        assert float(img.data.max()) == 1.5

    def test_buffers_frozen(self):
        img = PlanarImage(np.zeros((2, 2, 3)), ColorState.CAMERA_RGB)
        with pytest.raises(ValueError):
            img.data[0, 0, 0] = 1.0

    def test_bayer_rejects_odd_dims(self):
        with pytest.raises(ValueError, match="even"):
            BayerImage(np.zeros((3, 4)))

    def test_bayer_rejects_3d(self):
        with pytest.raises(ValueError):
            BayerImage(np.zeros((4, 4, 3)))


class TestCameraProfile:
    def test_rows_normalized_at_load(self):
        m = np.array([[2.0, 1.0, 1.0], [0.0, 3.0, 0.0], [1.0, 1.0, 2.0]])
        p = CameraProfile("t", m, m)
        assert np.allclose(p.ccm_low.sum(axis=1), 1.0)
        assert np.allclose(p.ccm_high.sum(axis=1), 1.0)

    def test_singular_rejected(self):
        m = np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        with pytest.raises(SingularMatrixError):
            CameraProfile("t", m, m)

    def test_blend_endpoints(self):
        low = np.diag([1.0, 2.0, 4.0]) + 0.1
        high = np.eye(3)
        p = CameraProfile("t", low, high)
        assert np.allclose(p.blended(1.0), p.ccm_low)
        assert np.allclose(p.blended(0.0), p.ccm_high)


class TestToneCurve:
    def test_identity_grid(self):
        c = ToneCurve.identity(64)
        assert c.n == 64
        assert np.allclose(c.samples[0], c.grid)

    def test_non_monotone_rejected(self):
        t = np.linspace(0, 1, 32)
        bad = t.copy()
        bad[10] = bad[12]  # flat segment -> not strictly increasing
        with pytest.raises(ValueError, match="strictly increasing"):
            ToneCurve(np.stack([t, bad, t]))

    def test_too_few_samples_rejected(self):
        t = np.linspace(0, 1, 8)
        with pytest.raises(ValueError, match="at least 16"):
            ToneCurve(np.stack([t, t, t]))

    def test_endpoint_bounds(self):
        t = np.linspace(0.0, 1.1, 32)
        with pytest.raises(ValueError, match="endpoints"):
            ToneCurve(np.stack([t, t, t]))
