"""Batch corpus ingestion and paired-dataset generation.

`generate` walks the configured source globs, draws per-pair crops and
parameters from seed-derived streams, synthesizes each pair, and writes the
images plus a JSONL manifest. The output tree is a pure function of
(config, seed, asset bank, input bytes): worker count and scheduling order
never change a byte.
"""

from __future__ import annotations

import glob
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bank import AssetBank, load_or_build_bank
from .config import GenerationConfig, resolve_against_config
from .core import ColorState, IngestError, PipelineError, PlanarImage
from .fileio import encode_image, output_suffix, quantize, read_image
from .pairgen import synthesize_pair
from .sampling import (
    CROP_STREAM,
    SPOT_CHECK_STREAM,
    SampledParams,
    pair_rng,
    params_for_pair_index,
)

log = logging.getLogger(__name__)


class GenerationError(PipelineError):
    pass


class ReplayError(PipelineError):
    pass


@dataclass
class PairManifestEntry:
    """One manifest line: everything needed to regenerate the pair in isolation."""

    pair_id: str
    pair_index: int
    source_path: str
    crop_origin: tuple[int, int]  # (x, y) in the downscaled frame
    crop_size: int
    params: SampledParams
    low_path: str
    normal_path: str
    bank_hash: str
    bank_path: str
    downscale_factor: int
    bit_depth: int
    rerendered_gt: bool
    tool_version: str = __version__

    def to_json(self) -> str:
        doc = {
            "pair_id": self.pair_id,
            "pair_index": self.pair_index,
            "source_path": self.source_path,
            "crop_origin": list(self.crop_origin),
            "crop_size": self.crop_size,
            "params": self.params.to_dict(),
            "low_path": self.low_path,
            "normal_path": self.normal_path,
            "bank_hash": self.bank_hash,
            "bank_path": self.bank_path,
            "downscale_factor": self.downscale_factor,
            "bit_depth": self.bit_depth,
            "rerendered_gt": self.rerendered_gt,
            "tool_version": self.tool_version,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "PairManifestEntry":
        doc = json.loads(line)
        return cls(
            pair_id=doc["pair_id"],
            pair_index=int(doc["pair_index"]),
            source_path=doc["source_path"],
            crop_origin=tuple(doc["crop_origin"]),
            crop_size=int(doc["crop_size"]),
            params=SampledParams.from_dict(doc["params"]),
            low_path=doc["low_path"],
            normal_path=doc["normal_path"],
            bank_hash=doc["bank_hash"],
            bank_path=doc["bank_path"],
            downscale_factor=int(doc["downscale_factor"]),
            bit_depth=int(doc["bit_depth"]),
            rerendered_gt=bool(doc["rerendered_gt"]),
            tool_version=doc.get("tool_version", "unknown"),
        )


@dataclass
class GenerationReport:
    manifest_path: Path
    entries: list[PairManifestEntry]
    failures: list[tuple[str, str]]
    elapsed_s: float

    @property
    def pairs_per_second(self) -> float:
        return len(self.entries) / self.elapsed_s if self.elapsed_s > 0 else float("inf")


def ingest(path) -> PlanarImage:
    """Read an 8/16-bit PNG/PPM into normalized float32 sRGB planes."""
    arr, maxval = read_image(path)
    data = arr.astype(np.float32) / np.float32(maxval)
    return PlanarImage(data, ColorState.SRGB_NONLINEAR)


def downscale2(img: PlanarImage) -> PlanarImage:
    """2x2 box average per channel; odd trailing row/column is cropped first."""
    h = img.height - img.height % 2
    w = img.width - img.width % 2
    x = img.data[:h, :w, :].astype(np.float64)
    out = (x[0::2, 0::2] + x[0::2, 1::2] + x[1::2, 0::2] + x[1::2, 1::2]) * 0.25
    return PlanarImage(out, img.state)


def _prepared_source(path, downscale_factor: int) -> PlanarImage:
    img = ingest(path)
    if downscale_factor == 2:
        img = downscale2(img)
    return img


def _crop(img: PlanarImage, x: int, y: int, size: int) -> np.ndarray:
    return img.data[y : y + size, x : x + size, :]


def _draw_crop_origin(img: PlanarImage, size: int, rng: np.random.Generator):
    if img.width < size or img.height < size:
        raise GenerationError(
            f"source is {img.width}x{img.height} after preparation, smaller than "
            f"the {size}x{size} patch"
        )
    x = int(rng.integers(0, img.width - size + 1))
    y = int(rng.integers(0, img.height - size + 1))
    return x, y


def _synthesize_entry(
    cfg: GenerationConfig,
    bank: AssetBank,
    source_path: str,
    img: PlanarImage,
    pair_index: int,
) -> tuple[PairManifestEntry, bytes, bytes]:
    crop_rng = pair_rng(cfg.master_seed, pair_index, CROP_STREAM)
    x, y = _draw_crop_origin(img, cfg.patch_size, crop_rng)
    crop = _crop(img, x, y, cfg.patch_size)

    params = params_for_pair_index(cfg, bank, pair_index)
    low, normal = synthesize_pair(crop, params, bank, rerendered_gt=cfg.rerendered_gt)

    suffix = output_suffix(cfg.bit_depth)
    pair_id = f"pair_{pair_index:08d}"
    entry = PairManifestEntry(
        pair_id=pair_id,
        pair_index=pair_index,
        source_path=str(source_path),
        crop_origin=(x, y),
        crop_size=cfg.patch_size,
        params=params,
        low_path=f"low/{pair_id}{suffix}",
        normal_path=f"normal/{pair_id}{suffix}",
        bank_hash=bank.hash,
        bank_path=str(resolve_against_config(cfg, cfg.bank_path)),
        downscale_factor=cfg.downscale_factor,
        bit_depth=cfg.bit_depth,
        rerendered_gt=cfg.rerendered_gt,
    )
    low_bytes = encode_image(quantize(low, cfg.bit_depth), cfg.bit_depth)
    normal_bytes = encode_image(quantize(normal, cfg.bit_depth), cfg.bit_depth)
    return entry, low_bytes, normal_bytes


def _source_task(cfg, bank, out_dir: Path, source_index: int, source_path: str):
    entries, failures = [], []
    try:
        img = _prepared_source(source_path, cfg.downscale_factor)
    except (IngestError, GenerationError) as exc:
        return [], [(source_path, str(exc))]
    for k in range(cfg.pairs_per_image):
        pair_index = source_index * cfg.pairs_per_image + k
        try:
            entry, low_bytes, normal_bytes = _synthesize_entry(
                cfg, bank, source_path, img, pair_index
            )
        except (PipelineError, ValueError) as exc:
            failures.append((source_path, f"pair {pair_index}: {exc}"))
            continue
        (out_dir / entry.low_path).write_bytes(low_bytes)
        (out_dir / entry.normal_path).write_bytes(normal_bytes)
        entries.append(entry)
    return entries, failures


# Worker-process state. The parent sets this before spawning the pool so that
# fork-started workers inherit the already-loaded bank; spawn-started workers
# load it in the initializer instead.
_WORKER_BANK: AssetBank | None = None


def _worker_init(bank_path: str, expected_hash: str) -> None:
    global _WORKER_BANK
    if _WORKER_BANK is None or _WORKER_BANK.hash != expected_hash:
        from .bank import load_bank

        _WORKER_BANK = load_bank(bank_path)


def _pool_task(cfg, out_dir: str, source_index: int, source_path: str):
    assert _WORKER_BANK is not None
    return _source_task(cfg, _WORKER_BANK, Path(out_dir), source_index, source_path)


def resolve_sources(cfg: GenerationConfig) -> list[str]:
    found: set[str] = set()
    for pattern in cfg.inputs:
        resolved = str(resolve_against_config(cfg, pattern))
        found.update(glob.glob(resolved))
    return sorted(found)


def generate(cfg: GenerationConfig, out_dir=None) -> GenerationReport:
    """Run the full batch: sources -> pairs -> images + JSONL manifest.

    Per-source failures are logged and skipped; GenerationError is raised when
    no pair at all could be produced. A deterministic 1% sample of the emitted
    pairs is re-synthesized from its manifest entry and byte-compared against
    the written files before returning.
    """
    cfg.validate()
    out = Path(out_dir) if out_dir is not None else (
        Path(cfg.output_dir) if cfg.output_dir else None
    )
    if out is None:
        raise GenerationError("no output directory configured")
    sources = resolve_sources(cfg)
    if not sources:
        raise GenerationError(f"no inputs matched {cfg.inputs}")

    bank = load_or_build_bank(resolve_against_config(cfg, cfg.bank_path), cfg.n_tone_curves)
    (out / "low").mkdir(parents=True, exist_ok=True)
    (out / "normal").mkdir(parents=True, exist_ok=True)

    started = time.perf_counter()
    entries: list[PairManifestEntry] = []
    failures: list[tuple[str, str]] = []
    if cfg.workers == 1:
        results = [_source_task(cfg, bank, out, i, src) for i, src in enumerate(sources)]
    else:
        global _WORKER_BANK
        _WORKER_BANK = bank  # inherited by fork-started workers
        bank_path = str(resolve_against_config(cfg, cfg.bank_path))
        try:
            with ProcessPoolExecutor(
                max_workers=cfg.workers,
                initializer=_worker_init,
                initargs=(bank_path, bank.hash),
            ) as pool:
                futures = [
                    pool.submit(_pool_task, cfg, str(out), i, src)
                    for i, src in enumerate(sources)
                ]
                results = [fut.result() for fut in futures]
        finally:
            _WORKER_BANK = None
    for got, bad in results:
        entries.extend(got)
        failures.extend(bad)
    elapsed = time.perf_counter() - started

    for src, why in failures:
        log.warning("skipped %s: %s", src, why)
    if not entries:
        raise GenerationError("all sources failed; no pairs were generated")

    entries.sort(key=lambda e: e.pair_index)
    manifest_path = out / "manifest.jsonl"
    tmp_path = out / "manifest.jsonl.tmp"
    tmp_path.write_text("".join(e.to_json() + "\n" for e in entries))
    tmp_path.replace(manifest_path)  # atomic: readers never see a partial manifest

    _spot_replay(cfg, bank, out, entries)
    return GenerationReport(
        manifest_path=manifest_path, entries=entries, failures=failures, elapsed_s=elapsed
    )


def _spot_replay(cfg, bank, out_dir: Path, entries) -> None:
    if cfg.spot_replay_fraction <= 0 or not entries:
        return
    n_checks = max(1, math.ceil(cfg.spot_replay_fraction * len(entries)))
    rng = pair_rng(cfg.master_seed, 0, SPOT_CHECK_STREAM)
    picks = rng.choice(len(entries), size=min(n_checks, len(entries)), replace=False)
    for i in sorted(int(p) for p in picks):
        entry = entries[i]
        low_bytes, normal_bytes = replay_entry_bytes(entry, bank)
        if (out_dir / entry.low_path).read_bytes() != low_bytes or (
            out_dir / entry.normal_path
        ).read_bytes() != normal_bytes:
            raise GenerationError(
                f"spot replay mismatch for {entry.pair_id}; generation is not deterministic"
            )
    log.info("spot replay verified %d/%d pairs", len(picks), len(entries))


def replay_entry_bytes(entry: PairManifestEntry, bank: AssetBank) -> tuple[bytes, bytes]:
    """Re-synthesize one manifest entry and return the encoded (low, normal) bytes."""
    if bank.hash != entry.bank_hash:
        raise ReplayError(
            f"asset bank hash mismatch for {entry.pair_id}: manifest recorded "
            f"{entry.bank_hash}, loaded bank has {bank.hash}"
        )
    img = _prepared_source(entry.source_path, entry.downscale_factor)
    x, y = entry.crop_origin
    crop = _crop(img, x, y, entry.crop_size)
    if crop.shape[0] != entry.crop_size or crop.shape[1] != entry.crop_size:
        raise ReplayError(f"recorded crop falls outside the source for {entry.pair_id}")
    low, normal = synthesize_pair(crop, entry.params, bank, rerendered_gt=entry.rerendered_gt)
    return (
        encode_image(quantize(low, entry.bit_depth), entry.bit_depth),
        encode_image(quantize(normal, entry.bit_depth), entry.bit_depth),
    )


def load_manifest(manifest_path) -> list[PairManifestEntry]:
    lines = Path(manifest_path).read_text().splitlines()
    return [PairManifestEntry.from_json(line) for line in lines if line.strip()]


def replay_pair(manifest_path, pair_id: str, bank_path=None, out_dir=None):
    """Regenerate one pair from its manifest entry, byte-identically.

    Returns (entry, low_path, normal_path, matches_original | None). The bank
    is loaded from bank_path (default: the path recorded in the entry) and its
    hash must match the manifest record.
    """
    entries = {e.pair_id: e for e in load_manifest(manifest_path)}
    try:
        entry = entries[pair_id]
    except KeyError:
        raise ReplayError(f"pair id {pair_id!r} not present in {manifest_path}") from None

    from .bank import load_bank  # deferred to keep module import light

    bank = load_bank(bank_path if bank_path is not None else entry.bank_path)
    low_bytes, normal_bytes = replay_entry_bytes(entry, bank)

    base = Path(out_dir) if out_dir is not None else Path(manifest_path).parent / "replayed"
    low_path = base / entry.low_path
    normal_path = base / entry.normal_path
    low_path.parent.mkdir(parents=True, exist_ok=True)
    normal_path.parent.mkdir(parents=True, exist_ok=True)
    low_path.write_bytes(low_bytes)
    normal_path.write_bytes(normal_bytes)

    matches = None
    orig_low = Path(manifest_path).parent / entry.low_path
    orig_normal = Path(manifest_path).parent / entry.normal_path
    if orig_low.is_file() and orig_normal.is_file():
        matches = (
            orig_low.read_bytes() == low_bytes and orig_normal.read_bytes() == normal_bytes
        )
    return entry, low_path, normal_path, matches


def hash_tree(root) -> str:
    """Order-independent content hash of a directory tree (for determinism checks)."""
    root = Path(root)
    h = hashlib.sha256()
    for p in sorted(q for q in root.rglob("*") if q.is_file()):
        h.update(str(p.relative_to(root)).encode())
        h.update(b"\0")
        h.update(p.read_bytes())
    return h.hexdigest()
