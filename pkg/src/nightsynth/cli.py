"""Command-line interface: generate, replay, curves, calibrate, bank."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    calibrate_exposure,
    compare_exposure_curves,
    plot_curves,
    plot_histogram,
    write_curves_csv,
    write_histogram_csv,
)
from .bank import DEFAULT_N_CURVES, build_default_bank
from .config import ConfigError, load_config
from .core import PipelineError
from .dataset import generate, replay_pair

log = logging.getLogger("nightsynth")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nightsynth",
        description="Synthesize paired low-light / normal-light training images "
        "through a simulated camera ISP.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="generate a paired dataset from a config file")
    p_gen.add_argument("--config", required=True, help="YAML config file")
    p_gen.add_argument("--seed", type=int, default=None, help="override master seed")
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--workers", type=int, default=None, help="worker thread count")

    p_rep = sub.add_parser("replay", help="regenerate one pair from a manifest entry")
    p_rep.add_argument("--manifest", required=True, help="manifest.jsonl from a generate run")
    p_rep.add_argument("--pair-id", required=True)
    p_rep.add_argument("--out", default=None, help="directory for the replayed files")
    p_rep.add_argument("--bank", default=None, help="override the recorded bank path")

    p_cur = sub.add_parser("curves", help="exposure-adjustment curves for paired directories")
    p_cur.add_argument("--low", required=True, help="directory of low-light images")
    p_cur.add_argument("--gt", required=True, help="directory of normal-light counterparts")
    p_cur.add_argument("--out", required=True, help="output CSV path (figure saved alongside)")

    p_cal = sub.add_parser("calibrate", help="suggest an exposure range from real references")
    p_cal.add_argument("--refs", required=True, help="directory of real low-light images")
    p_cal.add_argument("--sources", default=None, help="normal-light baseline directory")
    p_cal.add_argument("--out", default=None, help="directory for histogram CSV + figure")
    p_cal.add_argument("--e-cap", type=float, default=20.0, help="maximum suggested stops")

    p_bank = sub.add_parser("bank", help="materialize the default asset bank")
    p_bank.add_argument("--out", required=True, help="bank directory to create")
    p_bank.add_argument("--curves", type=int, default=DEFAULT_N_CURVES, help="tone curve count")
    return parser


def _cmd_generate(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.workers is not None:
        cfg.workers = args.workers
    report = generate(cfg, out_dir=args.out)
    print(
        f"wrote {len(report.entries)} pairs to {args.out} "
        f"({report.pairs_per_second:.1f} pairs/s, {len(report.failures)} source failures)"
    )
    print(f"manifest: {report.manifest_path}")
    return 0


def _cmd_replay(args) -> int:
    entry, low_path, normal_path, matches = replay_pair(
        args.manifest, args.pair_id, bank_path=args.bank, out_dir=args.out
    )
    print(f"replayed {entry.pair_id} -> {low_path}, {normal_path}")
    if matches is None:
        print("original files not found; nothing to compare against")
        return 0
    print(f"byte-identical to originals: {'yes' if matches else 'NO'}")
    return 0 if matches else 2


def _cmd_curves(args) -> int:
    names, curves = compare_exposure_curves(args.low, args.gt)
    out_csv = Path(args.out)
    out_csv.parent.mkdir(parents=True, exist_ok=True)
    write_curves_csv(out_csv, names, curves)
    fig_path = out_csv.with_suffix(".png")
    plot_curves(fig_path, curves)
    print(f"wrote {len(names)} curves to {out_csv} (figure: {fig_path})")
    return 0


def _cmd_calibrate(args) -> int:
    result = calibrate_exposure(args.refs, sources_dir=args.sources, e_cap=args.e_cap)
    print(
        f"suggested exposure range: [{result.suggested.e_lo:.3f}, "
        f"{result.suggested.e_hi:.3f}] stops "
        f"(reference mean luma 5th-95th pct: "
        f"{float(np.percentile(result.mean_y_per_image, 5)):.4f}.."
        f"{float(np.percentile(result.mean_y_per_image, 95)):.4f})"
    )
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_histogram_csv(out / "luma_histogram.csv", result)
        plot_histogram(out / "luma_histogram.png", result)
        print(f"report written under {out}")
    return 0


def _cmd_bank(args) -> int:
    bank = build_default_bank(args.out, n_curves=args.curves)
    print(
        f"bank at {args.out}: {len(bank.profiles)} profiles, "
        f"{len(bank.tone_curves)} tone curves, hash {bank.hash[:16]}..."
    )
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "replay": _cmd_replay,
    "curves": _cmd_curves,
    "calibrate": _cmd_calibrate,
    "bank": _cmd_bank,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return _COMMANDS[args.command](args)
    except (PipelineError, ConfigError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
