"""nightsynth: paired low-light / normal-light data synthesis through a simulated camera ISP.

Normal-light sRGB images are unprocessed to a simulated RAW mosaic, degraded
with exposure loss and sensor noise in the RAW domain, and re-rendered through
a randomized forward pipeline, yielding realistic training pairs with a full
replay record per pair.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    AssetBankError,
    BayerImage,
    CameraProfile,
    clip01,
    ColorState,
    ColorStateError,
    IngestError,
    NonFiniteSampleError,
    PipelineError,
    PlanarImage,
    rgb_to_y,
    SingularMatrixError,
    srgb_decode,
    srgb_encode,
    ToneCurve,
)
from .reverse_isp import (  # noqa: E402
    inverse_cst,
    inverse_gamma,
    inverse_white_balance,
    invert_tone_curve,
    mosaic,
    ReverseParams,
    unprocess,
)
from .forward_isp import (  # noqa: E402
    cst,
    demosaic,
    ForwardParams,
    gamma_correct,
    process,
    sample_wb_gains,
    tone_map,
    white_balance,
)
from .degradation import (  # noqa: E402
    add_noise,
    degrade,
    ExposureRange,
    EXPOSURE_PRESETS,
    heteroscedastic_noise,
    NoiseModel,
    reduce_exposure,
    sample_noise_gains,
)
from .bank import (  # noqa: E402
    AssetBank,
    build_default_bank,
    compute_bank_hash,
    load_bank,
    load_or_build_bank,
)
from .sampling import (  # noqa: E402
    pair_rng,
    params_for_pair_index,
    rng_from_seed,
    sample_params,
    SampledParams,
)
from .config import config_from_dict, GenerationConfig, load_config  # noqa: E402
from .fileio import encode_image, quantize, read_image, write_image  # noqa: E402
from .pairgen import synthesize_pair  # noqa: E402
from .dataset import (  # noqa: E402
    downscale2,
    generate,
    GenerationReport,
    hash_tree,
    ingest,
    load_manifest,
    PairManifestEntry,
    replay_pair,
)
from .analysis import (  # noqa: E402
    calibrate_exposure,
    CalibrationResult,
    compare_exposure_curves,
    curve_slope_at,
    luminance_match_curve,
)
