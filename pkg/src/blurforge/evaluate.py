"""Evaluation metrics over generated or restored image sets.

The blur-instance ratio consumes detection-count files produced by any
external detector; mask overlap and PSNR are standard reference
metrics; manifest statistics summarize a generation run.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NotFoundError, ParseError, ShapeMismatchError, ZeroOriginalError
from .manifest import BRANCHES, iter_manifest


def hmb_ratio(restored_total: float, original_total: float) -> float:
    """Ratio of blur detections surviving restoration; lower is better."""
    if restored_total < 0 or original_total < 0:
        raise ValueError("detection counts must be >= 0")
    if original_total == 0:
        raise ZeroOriginalError("original detection count is zero")
    return restored_total / original_total


@dataclass(frozen=True)
class DetectionCounts:
    """Per-image blur detection counts for one image set."""

    counts: dict[str, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @classmethod
    def load(cls, path) -> "DetectionCounts":
        """Read JSONL lines of {"image": name, "count": n}."""
        path = Path(path)
        if not path.is_file():
            raise NotFoundError(f"no such counts file: {path}")
        counts: dict[str, int] = {}
        with path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    payload = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(str(exc), line=lineno) from None
                count = int(payload["count"])
                if count < 0:
                    raise ParseError("count must be >= 0", line=lineno)
                counts[str(payload["image"])] = count
        return cls(counts=counts)


def detection_ratio(original: DetectionCounts,
                    restored: DetectionCounts) -> dict:
    """Aggregate ratio plus per-image ratios where the original count > 0."""
    missing = set(original.counts) ^ set(restored.counts)
    if missing:
        raise ValueError(f"image keys do not align: {sorted(missing)[:5]}")
    per_image = {
        name: restored.counts[name] / count
        for name, count in original.counts.items() if count > 0
    }
    return {
        "original_total": original.total,
        "restored_total": restored.total,
        "ratio": hmb_ratio(restored.total, original.total),
        "per_image": per_image,
    }


def mask_dice(a: np.ndarray, b: np.ndarray) -> float:
    """Dice similarity 2|a&b| / (|a| + |b|); both empty counts as 1."""
    a, b = _as_binary_pair(a, b)
    denom = a.sum() + b.sum()
    if denom == 0:
        return 1.0
    return float(2.0 * np.logical_and(a, b).sum() / denom)


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union; both empty counts as 1."""
    a, b = _as_binary_pair(a, b)
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(a, b).sum() / union)


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """10 * log10(1 / mse) on [0,1] images; +inf for identical inputs."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"{a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def manifest_stats(path) -> dict:
    """Branch frequencies, sampled-parameter histograms, mask coverage."""
    branch_counts = {name: 0 for name in BRANCHES}
    fallbacks = 0
    params: dict[str, list[float]] = {}
    coverages: list[float] = []

    total = 0
    for _, payload in iter_manifest(path):
        if payload.get("kind") != "sample":
            continue
        total += 1
        branch_counts[payload["first_order_branch"]] += 1
        fallbacks += bool(payload.get("fallback_from_hmb"))
        coverages.append(float(payload.get("hmb_coverage", 0.0)))
        hmb = payload.get("hmb_params") or {}
        for key in ("erode_radius", "dilate_radius", "gaussian_sigma",
                    "max_step_length"):
            if key in hmb:
                params.setdefault(key, []).append(float(hmb[key]))
        for order in ("first_order_generic", "second_order_generic"):
            _collect_generic(params, order, payload.get(order))

    if total == 0:
        return {"total": 0, "branch_counts": branch_counts,
                "branch_frequencies": {}, "fallbacks": 0,
                "parameters": {}, "hmb_coverage": {}}
    return {
        "total": total,
        "branch_counts": branch_counts,
        "branch_frequencies": {k: v / total for k, v in branch_counts.items()},
        "fallbacks": fallbacks,
        "parameters": {k: _summary(v) for k, v in sorted(params.items())},
        "hmb_coverage": _summary(coverages),
    }


def _collect_generic(params: dict, prefix: str, draws: dict | None) -> None:
    if not draws:
        return
    blur = draws.get("blur")
    if blur:
        params.setdefault(f"{prefix}.kernel_size", []).append(blur["kernel_size"])
        params.setdefault(f"{prefix}.sigma_x", []).append(blur["sigma_x"])
    rz = draws.get("resize")
    if rz:
        params.setdefault(f"{prefix}.resize_scale", []).append(rz["scale"])
    noise = draws.get("noise")
    if noise:
        key = "sigma" if noise["kind"] == "gaussian" else "scale"
        params.setdefault(f"{prefix}.noise_{noise['kind']}", []).append(noise[key])
    jpeg = draws.get("jpeg")
    if jpeg:
        params.setdefault(f"{prefix}.jpeg_quality", []).append(jpeg["quality"])


def _summary(values: list[float]) -> dict:
    if not values:
        return {}
    arr = np.asarray(values, dtype=np.float64)
    hist, edges = np.histogram(arr, bins=10)
    return {
        "count": int(arr.size),
        "min": float(arr.min()),
        "max": float(arr.max()),
        "mean": float(arr.mean()),
        "histogram": {"counts": hist.tolist(), "edges": edges.tolist()},
    }


def _as_binary_pair(a: np.ndarray, b: np.ndarray):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"{a.shape} vs {b.shape}")
    return a > 0, b > 0
