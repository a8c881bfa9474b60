import json

import numpy as np
import pytest

from nightsynth import AssetBankError, build_default_bank, compute_bank_hash, load_bank
from nightsynth.bank import default_profiles, default_tone_curves


class TestDefaults:
    def test_eleven_profiles(self):
        profiles = default_profiles()
        assert len(profiles) == 11
        assert len({p.id for p in profiles}) == 11

    def test_profiles_blend_invertibly(self):
        for p in default_profiles():
            for g in np.linspace(0, 1, 11):
                assert abs(np.linalg.det(p.blended(float(g)))) > 1e-3

    def test_curve_count_presets(self):
        for n in (10, 50, 100, 200):
            assert len(default_tone_curves(n)) == n

    def test_curves_monotone_and_anchored(self):
        for curve in default_tone_curves(25):
            assert np.all(np.diff(curve.samples, axis=1) > 0)
            assert np.allclose(curve.samples[:, 0], 0.0)
            assert np.allclose(curve.samples[:, -1], 1.0)

    def test_build_is_deterministic(self, tmp_path):
        a = build_default_bank(tmp_path / "a", n_curves=10)
        b = build_default_bank(tmp_path / "b", n_curves=10)
        assert a.hash == b.hash


class TestLoad:
    def test_round_trip(self, tmp_path):
        built = build_default_bank(tmp_path / "bank", n_curves=10)
        loaded = load_bank(tmp_path / "bank")
        assert loaded.hash == built.hash
        assert len(loaded.profiles) == 11
        assert len(loaded.tone_curves) == 10
        p0 = loaded.profile_by_id("cam00")
        assert np.allclose(p0.ccm_low.sum(axis=1), 1.0)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(AssetBankError, match="manifest"):
            load_bank(tmp_path)

    def test_edited_curve_detected(self, tmp_path):
        build_default_bank(tmp_path / "bank", n_curves=10)
        victim = sorted((tmp_path / "bank" / "curves").glob("*.json"))[3]
        doc = json.loads(victim.read_text())
        doc["r"][128] = min(1.0, doc["r"][128] + 1e-6)
        victim.write_text(json.dumps(doc, sort_keys=True) + "\n")
        with pytest.raises(AssetBankError, match="hash mismatch"):
            load_bank(tmp_path / "bank")

    def test_unknown_profile_id(self, small_bank):
        with pytest.raises(AssetBankError, match="nope"):
            small_bank.profile_by_id("nope")

    def test_hash_covers_assets_only(self, tmp_path):
        bank = build_default_bank(tmp_path / "bank", n_curves=10)
        assert compute_bank_hash(tmp_path / "bank") == bank.hash
