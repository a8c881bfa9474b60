"""Dataset characterization: exposure-adjustment curves and exposure-range calibration.

The exposure-adjustment curve of a (low, ground-truth) pair is the monotone
histogram-matching map between their luma distributions, sampled at 256 points
on [0, 1]. A steeper curve means a more underexposed low image; "slope at x"
is measured as the chord curve(x)/x so it stays meaningful even when extreme
darkening saturates the curve well before x.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import PipelineError, rgb_to_y, srgb_decode, srgb_encode
from .degradation import ExposureRange
from .dataset import ingest

log = logging.getLogger(__name__)

CURVE_POINTS = 256


class AnalysisError(PipelineError):
    pass


def luminance_match_curve(
    low_y: np.ndarray, gt_y: np.ndarray, n_points: int = CURVE_POINTS
) -> np.ndarray:
    """Monotone map aligning the low image's luma CDF to the ground truth's.

    curve(x) = Quantile_gt(CDF_low(x)) evaluated on a uniform grid over [0, 1];
    non-decreasing with endpoints inside [0, 1] by construction.
    """
    grid = np.linspace(0.0, 1.0, n_points)
    low_sorted = np.sort(low_y.ravel().astype(np.float64))
    gt_sorted = np.sort(gt_y.ravel().astype(np.float64))
    ranks = np.searchsorted(low_sorted, grid, side="right") / low_sorted.size
    return np.quantile(gt_sorted, ranks)


def _paired_files(low_dir, gt_dir):
    low_root, gt_root = Path(low_dir), Path(gt_dir)
    lows = {p.name: p for p in sorted(low_root.iterdir()) if p.is_file()}
    gts = {p.name: p for p in sorted(gt_root.iterdir()) if p.is_file()}
    unpaired = sorted(set(lows) ^ set(gts))
    if unpaired:
        raise AnalysisError(f"unpaired file names between {low_root} and {gt_root}: {unpaired}")
    if not lows:
        raise AnalysisError(f"no files found under {low_root}")
    return [(name, lows[name], gts[name]) for name in sorted(lows)]


def compare_exposure_curves(low_dir, gt_dir, n_points: int = CURVE_POINTS):
    """Per-pair exposure-adjustment curves for name-paired directories.

    Returns (pair_names, curves) with curves of shape (n_pairs, n_points).
    """
    names, curves = [], []
    for name, low_path, gt_path in _paired_files(low_dir, gt_dir):
        low_y = rgb_to_y(ingest(low_path))
        gt_y = rgb_to_y(ingest(gt_path))
        names.append(name)
        curves.append(luminance_match_curve(low_y, gt_y, n_points))
    return names, np.asarray(curves)


def curve_slope_at(curves: np.ndarray, x: float = 0.1) -> np.ndarray:
    """Chord slope curve(x)/x per curve (see module docstring)."""
    if not 0.0 < x <= 1.0:
        raise ValueError(f"slope abscissa must be in (0, 1], got {x}")
    curves = np.atleast_2d(np.asarray(curves, dtype=np.float64))
    n = curves.shape[1]
    grid = np.linspace(0.0, 1.0, n)
    values = np.array([np.interp(x, grid, c) for c in curves])
    return values / x


def write_curves_csv(path, names, curves) -> None:
    curves = np.asarray(curves)
    grid = np.linspace(0.0, 1.0, curves.shape[1])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pair"] + [f"{g:.8f}" for g in grid])
        for name, curve in zip(names, curves):
            writer.writerow([name] + [f"{v:.8f}" for v in curve])


def plot_curves(path, curves, title: str = "Exposure adjustment curves") -> None:
    """Render all curves over the identity diagonal to a figure file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    curves = np.atleast_2d(np.asarray(curves))
    grid = np.linspace(0.0, 1.0, curves.shape[1])
    fig, ax = plt.subplots(figsize=(5, 5))
    for curve in curves:
        ax.plot(grid, curve, color="tab:blue", alpha=min(1.0, 4.0 / len(curves)), lw=1.0)
    ax.plot([0, 1], [0, 1], color="gray", ls="--", lw=1.0, label="identity")
    ax.set_xlabel("low-light luma")
    ax.set_ylabel("normal-light luma")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_title(title)
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


@dataclass
class CalibrationResult:
    histogram: np.ndarray  # pooled 256-bin Y histogram (counts)
    bin_edges: np.ndarray
    mean_y_per_image: np.ndarray
    suggested: ExposureRange


def _mean_y_of_dir(directory) -> tuple[np.ndarray, np.ndarray, list[np.ndarray]]:
    paths = sorted(p for p in Path(directory).iterdir() if p.is_file())
    if not paths:
        raise AnalysisError(f"no reference images under {directory}")
    hist = np.zeros(256, dtype=np.int64)
    edges = np.linspace(0.0, 1.0, 257)
    means, lumas = [], []
    for p in paths:
        y = rgb_to_y(ingest(p))
        hist += np.histogram(y, bins=edges)[0]
        means.append(float(y.mean()))
        lumas.append(y)
    return hist, np.asarray(means), lumas


def _synthetic_mean_y(linear_pool: np.ndarray, e: float) -> float:
    return float(np.mean(srgb_encode(linear_pool / 2.0**e)))


def _solve_exposure(linear_pool: np.ndarray, target_y: float, e_cap: float) -> float:
    # Mean encoded luma is strictly decreasing in e; bisect on [0, cap].
    if target_y >= _synthetic_mean_y(linear_pool, 0.0):
        return 0.0
    if target_y <= _synthetic_mean_y(linear_pool, e_cap):
        return e_cap
    lo, hi = 0.0, e_cap
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _synthetic_mean_y(linear_pool, mid) > target_y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def calibrate_exposure(
    refs_dir, sources_dir=None, e_cap: float = 20.0, baseline_linear: float = 0.2
) -> CalibrationResult:
    """Pooled Y histogram of real low-light references plus a suggested exposure range.

    The suggested range brackets the references' 5th-95th percentile mean luma:
    for each percentile target, solve mean(srgb_encode(L / 2^e)) = target over a
    pool of baseline linear-luma samples. The pool comes from sources_dir when
    given (recommended); otherwise a flat mid-gray baseline is assumed. Values
    clamp to [0, e_cap].
    """
    hist, mean_y, _ = _mean_y_of_dir(refs_dir)
    if sources_dir is not None:
        _, _, lumas = _mean_y_of_dir(sources_dir)
        pooled = np.concatenate([y.ravel() for y in lumas]).astype(np.float64)
        if pooled.size > 200_000:
            pooled = pooled[:: pooled.size // 200_000 + 1]
        linear_pool = srgb_decode(pooled)
    else:
        linear_pool = np.asarray([baseline_linear], dtype=np.float64)

    q5, q95 = np.percentile(mean_y, [5.0, 95.0])
    e_hi = _solve_exposure(linear_pool, float(q5), e_cap)
    e_lo = _solve_exposure(linear_pool, float(q95), e_cap)
    if e_lo > e_hi:
        e_lo, e_hi = e_hi, e_lo
    return CalibrationResult(
        histogram=hist,
        bin_edges=np.linspace(0.0, 1.0, 257),
        mean_y_per_image=mean_y,
        suggested=ExposureRange(e_lo, e_hi),
    )


def write_histogram_csv(path, result: CalibrationResult) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_lo", "bin_hi", "count"])
        for lo, hi, count in zip(
            result.bin_edges[:-1], result.bin_edges[1:], result.histogram
        ):
            writer.writerow([f"{lo:.8f}", f"{hi:.8f}", int(count)])


def plot_histogram(path, result: CalibrationResult) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    centers = 0.5 * (result.bin_edges[:-1] + result.bin_edges[1:])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(centers, result.histogram, width=1.0 / 256, color="tab:blue")
    ax.set_xlabel("luma (BT.601 Y)")
    ax.set_ylabel("pixel count")
    ax.set_title(
        f"Reference luma histogram; suggested e in "
        f"[{result.suggested.e_lo:.2f}, {result.suggested.e_hi:.2f}] stops"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
