"""Asset bank: camera profiles and tone curves stored as JSON files with a content hash.

Layout:
    <bank>/profiles/*.json   {"id": str, "ccm_low": 3x3, "ccm_high": 3x3}  (row-major)
    <bank>/curves/*.json     {"id": str, "n": int, "r": [...], "g": [...], "b": [...]}
    <bank>/bank.json         {"version": 1, "n_profiles": N, "n_curves": M, "hash": hex}

The default bank is built deterministically: 11 profiles derived from four
publicly documented XYZ->camera calibration matrices (pure, pairwise midpoints,
equal mix) with a fixed warm shift for the 2500K endpoint, and an S-curve
family of strictly monotone tone curves (200 by default).
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import AssetBankError, CameraProfile, ToneCurve

log = logging.getLogger(__name__)

BANK_VERSION = 1
DEFAULT_N_CURVES = 200
CURVE_SAMPLES = 256
_CURVE_BUILD_SEED = 0x746F6E65  # fixed so shipped banks are reproducible

# Publicly documented XYZ->camera calibration matrices (widely redistributed in
# open unprocessing code); camera->XYZ endpoints are derived from these.
_XYZ2CAM_BASES = [
    [[1.0234, -0.2969, -0.2266], [-0.5625, 1.6328, -0.0469], [-0.0703, 0.2188, 0.6406]],
    [[0.4913, -0.0541, -0.0202], [-0.6130, 1.3513, 0.2906], [-0.1564, 0.2151, 0.7183]],
    [[0.8380, -0.2630, -0.0639], [-0.2887, 1.0725, 0.2496], [-0.0627, 0.1427, 0.5438]],
    [[0.6596, -0.2079, -0.0562], [-0.4782, 1.3016, 0.1933], [-0.0970, 0.1581, 0.5181]],
]

# Fixed channel scaling applied on the camera side to form the warm (2500K)
# calibration endpoint from the cool one.
_WARM_SHIFT = np.diag([1.18, 1.0, 0.82])


@dataclass(frozen=True)
class AssetBank:
    """Loaded asset bank plus the content hash recorded at load time."""

    profiles: list
    tone_curves: list
    hash: str
    path: str

    def __post_init__(self):
        if not self.profiles or not self.tone_curves:
            raise AssetBankError("asset bank must contain at least one profile and one curve")
        object.__setattr__(
            self, "_by_id", {p.id: p for p in self.profiles}
        )

    def profile_by_id(self, profile_id: str) -> CameraProfile:
        try:
            return self._by_id[profile_id]
        except KeyError:
            raise AssetBankError(f"profile {profile_id!r} not in bank {self.path}") from None


def _base_mixes():
    """11 camera->XYZ base matrices: 4 pure, 6 pairwise midpoints, 1 equal mix."""
    bases = [np.linalg.inv(np.asarray(m, dtype=np.float64)) for m in _XYZ2CAM_BASES]
    mixes = list(bases)
    for i in range(4):
        for j in range(i + 1, 4):
            mixes.append(0.5 * (bases[i] + bases[j]))
    mixes.append(sum(bases) / 4.0)
    return mixes


def default_profiles() -> list:
    profiles = []
    for k, cam2xyz in enumerate(_base_mixes()):
        profiles.append(
            CameraProfile(
                id=f"cam{k:02d}",
                ccm_low=cam2xyz @ _WARM_SHIFT,
                ccm_high=cam2xyz,
            )
        )
    return profiles


def default_tone_curves(n_curves: int = DEFAULT_N_CURVES, n: int = CURVE_SAMPLES) -> list:
    """S-curve family t(x) = x^a / (x^a + (1-x)^a), gentle to strong contrast.

    Exponents are log-spaced over [1.0, 2.6] with a small deterministic
    per-channel jitter so each curve is a distinct color transform. All curves
    are strictly monotone with t(0) = 0 and t(1) = 1.
    """
    if n_curves < 1:
        raise ValueError("need at least one tone curve")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(_CURVE_BUILD_SEED)))
    exponents = np.exp(np.linspace(np.log(1.0), np.log(2.6), n_curves))
    x = np.linspace(0.0, 1.0, n)
    curves = []
    for a in exponents:
        jitter = rng.uniform(0.95, 1.05, size=3)
        samples = np.empty((3, n))
        for c in range(3):
            ac = a * jitter[c]
            num = np.power(x, ac)
            samples[c] = num / (num + np.power(1.0 - x, ac))
        curves.append(ToneCurve(samples))
    return curves


def _hash_files(paths: list[Path]) -> str:
    h = hashlib.sha256()
    for p in sorted(paths, key=lambda q: q.name):
        h.update(p.name.encode())
        h.update(b"\0")
        h.update(p.read_bytes())
    return h.hexdigest()


def _asset_files(root: Path):
    profiles = sorted((root / "profiles").glob("*.json"))
    curves = sorted((root / "curves").glob("*.json"))
    return profiles, curves


def compute_bank_hash(path) -> str:
    profiles, curves = _asset_files(Path(path))
    return _hash_files(profiles + curves)


def build_default_bank(path, n_curves: int = DEFAULT_N_CURVES) -> AssetBank:
    """Materialize the default bank under `path` and return it loaded."""
    root = Path(path)
    (root / "profiles").mkdir(parents=True, exist_ok=True)
    (root / "curves").mkdir(parents=True, exist_ok=True)

    for p in default_profiles():
        doc = {
            "id": p.id,
            "ccm_low": [[float(v) for v in row] for row in p.ccm_low],
            "ccm_high": [[float(v) for v in row] for row in p.ccm_high],
        }
        (root / "profiles" / f"{p.id}.json").write_text(
            json.dumps(doc, sort_keys=True) + "\n"
        )
    for k, curve in enumerate(default_tone_curves(n_curves)):
        doc = {
            "id": f"curve{k:04d}",
            "n": curve.n,
            "r": [float(v) for v in curve.samples[0]],
            "g": [float(v) for v in curve.samples[1]],
            "b": [float(v) for v in curve.samples[2]],
        }
        (root / "curves" / f"curve{k:04d}.json").write_text(
            json.dumps(doc, sort_keys=True) + "\n"
        )

    manifest = {
        "version": BANK_VERSION,
        "n_profiles": len(default_profiles()),
        "n_curves": n_curves,
        "hash": compute_bank_hash(root),
    }
    (root / "bank.json").write_text(json.dumps(manifest, sort_keys=True) + "\n")
    return load_bank(root)


def load_bank(path) -> AssetBank:
    """Load a bank directory, verifying the recorded content hash."""
    root = Path(path)
    manifest_path = root / "bank.json"
    if not manifest_path.is_file():
        raise AssetBankError(f"no bank manifest at {manifest_path}")
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("version") != BANK_VERSION:
        raise AssetBankError(f"unsupported bank version {manifest.get('version')}")

    profile_files, curve_files = _asset_files(root)
    actual = _hash_files(profile_files + curve_files)
    if actual != manifest.get("hash"):
        raise AssetBankError(
            f"bank content hash mismatch under {root}: assets were edited or the "
            f"manifest is stale (recorded {manifest.get('hash')}, computed {actual})"
        )

    profiles = []
    for f in profile_files:
        doc = json.loads(f.read_text())
        profiles.append(
            CameraProfile(id=doc["id"], ccm_low=doc["ccm_low"], ccm_high=doc["ccm_high"])
        )
    curves = []
    for f in curve_files:
        doc = json.loads(f.read_text())
        samples = np.array([doc["r"], doc["g"], doc["b"]], dtype=np.float64)
        if samples.shape[1] != doc["n"]:
            raise AssetBankError(f"curve file {f} is inconsistent with its declared n")
        curves.append(ToneCurve(samples))
    return AssetBank(profiles=profiles, tone_curves=curves, hash=actual, path=str(root))


def load_or_build_bank(path, n_curves: int = DEFAULT_N_CURVES) -> AssetBank:
    root = Path(path)
    if (root / "bank.json").is_file():
        return load_bank(root)
    log.info("no asset bank at %s; building the default bank (%d curves)", root, n_curves)
    return build_default_bank(root, n_curves=n_curves)
