"""End-to-end degradation: branch selection, HMB synthesis, second order.

One sample flows as: draw first-order branch (none / HMB / generic);
on the HMB branch build the part weight map, simulate a trajectory,
rasterize its PSF, convolve and blend; then always apply second-order
generic degradation; finally resize to the configured output size.
Every draw comes from the sample's own stream, so outputs depend only
on (root_seed, sample_index, config, inputs).
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import generic, hmb, image_io
from .config import PipelineConfig, validate_config  # noqa: F401  (re-export)
from .errors import BlurforgeError, EmptyGroupMaskError, ParseError
from .manifest import (
    BRANCH_GENERIC,
    BRANCH_HMB,
    BRANCHES,
    SampleRecord,
    make_header,
    write_manifest,
)
from .parts import PART_GROUPS, PartLabelMap
from .rng import RngStream, derive_stream
from .trajectory import TrajectoryParams, rasterize_psf, simulate_trajectory

HMB_GROUP_ATTEMPTS = 2  # one resample before falling back to generic


def draw_branch(rng: RngStream, branch_probs: dict[str, float]) -> str:
    """Single categorical draw over the three first-order branches."""
    probs = np.array([branch_probs[name] for name in BRANCHES])
    return rng.choice(BRANCHES, p=probs / probs.sum())


def draw_part_group(rng: RngStream, weights: dict[str, float]) -> str:
    w = np.array([weights.get(name, 0.0) for name in PART_GROUPS])
    return rng.choice(PART_GROUPS, p=w / w.sum())


@dataclass
class SampleOutput:
    lq: np.ndarray
    mask: np.ndarray
    record: SampleRecord
    # Populated on the HMB branch for preview dumps; None otherwise.
    intermediates: dict | None = None
    # Exact encoded bytes of a trailing jpeg stage, for jpeg passthrough.
    jpeg_bytes: bytes | None = None


def degrade_sample(hq: np.ndarray, labels: PartLabelMap, cfg: PipelineConfig,
                   sample_index: int, *, force_branch: str | None = None,
                   keep_intermediates: bool = False) -> SampleOutput:
    """Degrade one HQ image into its LQ pair and provenance record."""
    if hq.shape[:2] != labels.labels.shape:
        raise BlurforgeError(
            f"hq {hq.shape[:2]} and labels {labels.labels.shape} differ in size")

    stream = derive_stream(cfg.root_seed, sample_index)
    branch = draw_branch(stream, cfg.branch_probs)
    if force_branch is not None:
        if force_branch not in BRANCHES:
            raise ValueError(f"unknown branch {force_branch!r}")
        branch = force_branch

    record = SampleRecord(sample_index=sample_index, root_seed=cfg.root_seed,
                          first_order_branch=branch)
    mask = np.zeros(hq.shape[:2], dtype=np.uint8)
    intermediates: dict | None = None
    image = hq

    if branch == BRANCH_HMB:
        hmb_result = _apply_hmb(hq, labels, cfg, stream)
        if hmb_result is None:
            # Selected groups were absent from the frame; degrade
            # generically instead so the sample is not silently clean.
            record.first_order_branch = BRANCH_GENERIC
            record.fallback_from_hmb = True
            branch = BRANCH_GENERIC
        else:
            image, mask, params, intermediates = hmb_result
            record.selected_part_group = params.pop("part_group")
            record.hmb_params = params

    if branch == BRANCH_GENERIC:
        image, draws, _ = generic.apply_generic(image, cfg.first_order, stream)
        record.first_order_generic = draws

    image, so_draws, stage_bytes = generic.apply_generic(
        image, cfg.second_order, stream)
    record.second_order_generic = so_draws

    jpeg_bytes = None
    target = (cfg.output_size, cfg.output_size)
    if image.shape[:2] != target:
        image = generic.resize_to(image, target, cfg.final_resize_filter)
    else:
        # Geometry untouched after compression: the stage bytes ARE the LQ.
        jpeg_bytes = stage_bytes
    if mask.shape != target:
        mask = generic.resize_to(mask.astype(np.float64), target, "nearest")
        mask = (mask > 0.5).astype(np.uint8)

    record.hmb_coverage = float(mask.mean())
    if keep_intermediates and intermediates is None:
        intermediates = {}
    return SampleOutput(lq=image, mask=mask, record=record,
                        intermediates=intermediates if keep_intermediates else None,
                        jpeg_bytes=jpeg_bytes)


def _apply_hmb(hq: np.ndarray, labels: PartLabelMap, cfg: PipelineConfig,
               stream: RngStream):
    """Blur one part group; None if no drawn group yields a usable mask."""
    tr = cfg.trajectory
    for _ in range(HMB_GROUP_ATTEMPTS):
        group = draw_part_group(stream, cfg.part_group_weights)
        morph = hmb.MorphParams(
            erode_radius=int(stream.choice(cfg.morph.erode_radii)),
            dilate_radius=int(stream.integers(cfg.morph.dilate_radius_range[0],
                                              cfg.morph.dilate_radius_range[1] + 1)),
            gaussian_sigma=float(stream.uniform(*cfg.morph.gaussian_sigma_range)),
            binarize_threshold=cfg.morph.binarize_threshold,
        )
        try:
            weight_map = hmb.make_weight_map(labels, group, morph)
        except EmptyGroupMaskError:
            continue
        step_length = float(stream.uniform(*tr.step_length_range))
        params = TrajectoryParams.with_step_length(
            step_length, num_steps=tr.num_steps, canvas=tr.canvas,
            inertia=tr.inertia, big_shake_prob=tr.big_shake_prob,
            centripetal_gain=tr.centripetal_gain,
            perturbation_sigma=tr.sigma_factor * step_length)
        traj = simulate_trajectory(params, stream)
        psf = rasterize_psf(traj, tr.psf_size, tr.exposure_fraction)

        blurred = hmb.fft_convolve(hq, psf, mode=cfg.blend_mode)
        blended = hmb.blend(hq, blurred, weight_map)
        mask = hmb.binarize(1.0 - weight_map, morph.binarize_threshold)

        record_params = {
            "part_group": group,
            "erode_radius": morph.erode_radius,
            "dilate_radius": morph.dilate_radius,
            "gaussian_sigma": morph.gaussian_sigma,
            "binarize_threshold": morph.binarize_threshold,
            "max_step_length": step_length,
            "perturbation_sigma": params.perturbation_sigma,
            "num_steps": params.num_steps,
            "canvas": params.canvas,
            "inertia": params.inertia,
            "big_shake_prob": params.big_shake_prob,
            "centripetal_gain": params.centripetal_gain,
            "psf_size": tr.psf_size,
            "exposure_fraction": tr.exposure_fraction,
        }
        intermediates = {"weight_map": weight_map, "blurred": blurred,
                         "blended": blended, "psf": psf}
        return blended, mask, record_params, intermediates
    return None


@dataclass
class BatchSummary:
    total: int = 0
    branch_counts: dict[str, int] = field(
        default_factory=lambda: {name: 0 for name in BRANCHES})
    fallbacks: int = 0
    failures: list[dict] = field(default_factory=list)
    elapsed_seconds: float = 0.0

    @property
    def succeeded(self) -> int:
        return self.total - len(self.failures)

    @property
    def samples_per_second(self) -> float:
        if self.elapsed_seconds <= 0:
            return 0.0
        return self.succeeded / self.elapsed_seconds

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "succeeded": self.succeeded,
            "branch_counts": self.branch_counts,
            "fallbacks": self.fallbacks,
            "failures": self.failures,
            "elapsed_seconds": self.elapsed_seconds,
            "samples_per_second": self.samples_per_second,
        }


def read_input_manifest(path) -> list[dict]:
    """Input listing: JSONL of {"hq_path": ..., "labels_path": ...}."""
    entries = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(exc), line=lineno) from None
            if "hq_path" not in payload or "labels_path" not in payload:
                raise ParseError("entry needs hq_path and labels_path",
                                 line=lineno)
            entries.append(payload)
    return entries


def _process_one(args) -> dict:
    """Worker body; must stay importable for process pools."""
    index, entry, cfg, out_dir = args
    out_dir = Path(out_dir)
    try:
        hq = image_io.load_image(entry["hq_path"])
        raster = image_io.load_label_raster(entry["labels_path"])
        labels = PartLabelMap(labels=raster, legend=cfg.legend)
        result = degrade_sample(hq, labels, cfg, index)

        stem = f"{index:06d}"
        if cfg.lq_format == "jpeg" and result.jpeg_bytes is not None:
            lq_path = out_dir / "lq" / f"{stem}.jpg"
            lq_path.write_bytes(result.jpeg_bytes)
        else:
            lq_path = out_dir / "lq" / f"{stem}.png"
            image_io.save_image(result.lq, lq_path)
        mask_path = out_dir / "mask" / f"{stem}.png"
        image_io.save_mask(result.mask, mask_path)

        record = result.record
        record.hq_path = str(entry["hq_path"])
        record.lq_path = str(lq_path)
        record.mask_path = str(mask_path)
        return {"ok": True, "index": index, "record": record}
    except Exception as exc:  # noqa: BLE001 - partial-failure contract
        return {"ok": False, "index": index,
                "error": f"{type(exc).__name__}: {exc}"}


def run_batch(input_manifest, cfg: PipelineConfig, out_dir, *,
              jobs: int = 1, limit: int | None = None) -> BatchSummary:
    """Degrade every input pair, writing LQ, masks, and the run manifest.

    Failed samples are recorded in the summary and skipped in the
    manifest; callers decide the exit code. Output bytes are identical
    for any worker count.
    """
    out_dir = Path(out_dir)
    image_io.ensure_dir(out_dir / "lq")
    image_io.ensure_dir(out_dir / "mask")

    entries = read_input_manifest(input_manifest)
    if limit is not None:
        entries = entries[:limit]
    tasks = [(i, entry, cfg, str(out_dir)) for i, entry in enumerate(entries)]

    summary = BatchSummary(total=len(tasks))
    records: list[SampleRecord] = []
    start = time.perf_counter()
    if jobs <= 1:
        results = map(_process_one, tasks)
    else:
        pool = ProcessPoolExecutor(max_workers=jobs)
        results = pool.map(_process_one, tasks, chunksize=4)
    for outcome in results:
        if outcome["ok"]:
            record = outcome["record"]
            records.append(record)
            summary.branch_counts[record.first_order_branch] += 1
            summary.fallbacks += record.fallback_from_hmb
        else:
            summary.failures.append(
                {"index": outcome["index"], "error": outcome["error"]})
    if jobs > 1:
        pool.shutdown()
    summary.elapsed_seconds = time.perf_counter() - start

    header = make_header(cfg.root_seed, cfg.to_dict())
    write_manifest(out_dir / "manifest.jsonl", header, records)
    return summary
