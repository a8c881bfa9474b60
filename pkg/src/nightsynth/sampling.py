"""Per-pair parameter sampling: the single source of randomness and the replay record.

Every pair is driven by one SampledParams drawn from independent per-pair
streams derived from (master_seed, pair_index), so generation order and worker
count can never change any pair's content. The draw order within a stream is
frozen: exposure, lambda_s, lambda_r, two WB uniforms, profile index, blend g,
curve index, optional decoupled reverse draws, then the noise seed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .bank import AssetBank
from .degradation import ExposureRange, NoiseModel, sample_noise_gains
from .forward_isp import ForwardParams, sample_wb_gains
from .reverse_isp import ReverseParams

# Stream tags for per-pair SeedSequence derivation.
PARAM_STREAM = 0
CROP_STREAM = 1
SPOT_CHECK_STREAM = 2


def pair_rng(master_seed: int, pair_index: int, stream: int) -> np.random.Generator:
    """Independent generator for (master_seed, pair_index, stream); order-free."""
    ss = np.random.SeedSequence(entropy=(int(master_seed), int(pair_index), int(stream)))
    return np.random.Generator(np.random.PCG64(ss))


def rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


@dataclass(frozen=True)
class ReverseDraw:
    """Independent unprocessing draw used only in decoupled mode."""

    wb_gains: tuple[float, float, float]
    profile_id: str
    blend_g: float
    tone_curve_id: int


@dataclass(frozen=True)
class SampledParams:
    """Complete record of one pipeline draw; sufficient to replay a pair bit-exactly."""

    e: float
    lambda_s: float
    lambda_r: float
    wb_gains: tuple[float, float, float]
    profile_id: str
    blend_g: float
    tone_curve_id: int
    seed: int
    reverse: ReverseDraw | None = None

    def forward_params(self, bank: AssetBank) -> ForwardParams:
        return ForwardParams(
            wb_gains=self.wb_gains,
            profile=bank.profile_by_id(self.profile_id),
            blend_g=self.blend_g,
            tone_curve=bank.tone_curves[self.tone_curve_id],
        )

    def reverse_params(self, bank: AssetBank) -> ReverseParams:
        draw = self.reverse
        if draw is None:
            return ReverseParams(
                tone_curve=bank.tone_curves[self.tone_curve_id],
                profile=bank.profile_by_id(self.profile_id),
                blend_g=self.blend_g,
                wb_gains=self.wb_gains,
            )
        return ReverseParams(
            tone_curve=bank.tone_curves[draw.tone_curve_id],
            profile=bank.profile_by_id(draw.profile_id),
            blend_g=draw.blend_g,
            wb_gains=draw.wb_gains,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["wb_gains"] = list(self.wb_gains)
        if self.reverse is not None:
            d["reverse"]["wb_gains"] = list(self.reverse.wb_gains)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SampledParams":
        reverse = d.get("reverse")
        if reverse is not None:
            reverse = ReverseDraw(
                wb_gains=tuple(reverse["wb_gains"]),
                profile_id=reverse["profile_id"],
                blend_g=reverse["blend_g"],
                tone_curve_id=int(reverse["tone_curve_id"]),
            )
        return cls(
            e=float(d["e"]),
            lambda_s=float(d["lambda_s"]),
            lambda_r=float(d["lambda_r"]),
            wb_gains=tuple(d["wb_gains"]),
            profile_id=d["profile_id"],
            blend_g=float(d["blend_g"]),
            tone_curve_id=int(d["tone_curve_id"]),
            seed=int(d["seed"]),
            reverse=reverse,
        )


def sample_params(
    bank: AssetBank,
    exposure: ExposureRange,
    noise: NoiseModel,
    rng: np.random.Generator,
    wb_reference: str = "blue",
    shared_reverse: bool = True,
) -> SampledParams:
    """Draw one complete parameter record from the declared distributions."""
    n_profiles = len(bank.profiles)
    n_curves = len(bank.tone_curves)

    e = float(rng.uniform(exposure.e_lo, exposure.e_hi))
    if not math.isfinite(e):
        raise ValueError("sampled exposure is not finite")
    lambda_s, lambda_r = sample_noise_gains(noise, rng)
    wb = sample_wb_gains(rng, reference=wb_reference)
    profile_id = bank.profiles[int(rng.integers(n_profiles))].id
    blend_g = float(rng.uniform())
    curve_id = int(rng.integers(n_curves))

    reverse = None
    if not shared_reverse:
        r_wb = sample_wb_gains(rng, reference=wb_reference)
        r_profile = bank.profiles[int(rng.integers(n_profiles))].id
        r_g = float(rng.uniform())
        r_curve = int(rng.integers(n_curves))
        reverse = ReverseDraw(
            wb_gains=r_wb, profile_id=r_profile, blend_g=r_g, tone_curve_id=r_curve
        )

    seed = int(rng.integers(0, 2**64, dtype=np.uint64))
    return SampledParams(
        e=e,
        lambda_s=lambda_s,
        lambda_r=lambda_r,
        wb_gains=wb,
        profile_id=profile_id,
        blend_g=blend_g,
        tone_curve_id=curve_id,
        seed=seed,
        reverse=reverse,
    )


def params_for_pair_index(config, bank: AssetBank, pair_index: int) -> SampledParams:
    """The parameter draw for one pair index under a generation config.

    Single definition shared by the batch generator and the in-process
    dataloader wrapper, so both paths see identical draws by construction.
    """
    rng = pair_rng(config.master_seed, pair_index, PARAM_STREAM)
    return sample_params(
        bank,
        config.exposure,
        config.noise,
        rng,
        wb_reference=config.wb_reference_channel,
        shared_reverse=config.shared_reverse_params,
    )
