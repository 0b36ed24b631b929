"""Single-sample degrade call and the resumable batch iterator."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator

import numpy as np

import blurforge
from blurforge.config import build_config
from blurforge.errors import BlurforgeError
from blurforge.image_io import dequantize_u8, load_image, load_label_raster, quantize_u8
from blurforge.parts import PartLabelMap
from blurforge.pipeline import degrade_sample, read_input_manifest


class BindingError(Exception):
    """Structured error: (code, message, key) crossing the binding boundary."""

    def __init__(self, code: str, message: str, key: str | None = None):
        detail = f"[{code}] {message}" + (f" (key: {key})" if key else "")
        super().__init__(detail)
        self.code = code
        self.key = key


@dataclass(frozen=True)
class SampleBatchView:
    """One generated sample as contiguous, row-major arrays.

    `hq` and `lq` are float32 in [0, 1] on the 8-bit grid; `hmb_mask` is
    uint8 with values {0, 1}. `record` mirrors the manifest entry.
    """

    hq: np.ndarray
    lq: np.ndarray
    hmb_mask: np.ndarray
    record: dict


def degrade(hq_array: np.ndarray, labels_array: np.ndarray,
            config_path, sample_index: int) -> SampleBatchView:
    """Degrade one image; identical result to the CLI for the same key."""
    hq = _coerce_hq(hq_array)
    labels_raster = _coerce_labels(labels_array, hq.shape[:2])
    cfg = _load_config(config_path)
    try:
        labels = PartLabelMap(labels=labels_raster, legend=cfg.legend)
        result = degrade_sample(hq, labels, cfg, sample_index)
    except BlurforgeError as exc:
        raise BindingError("degrade", str(exc)) from exc
    return _view_from(hq, result)


def sample_iter(input_manifest, config_path, start: int = 0,
                end: int | None = None) -> Iterator[SampleBatchView]:
    """Yield samples [start, end) in index order; resumable at any start.

    Sample index equals the entry's position in the input manifest, so a
    slice is always a sub-sequence of the full run.
    """
    if start < 0:
        raise BindingError("slice", f"start must be >= 0, got {start}")
    cfg = _load_config(config_path)
    try:
        entries = read_input_manifest(input_manifest)
    except BlurforgeError as exc:
        raise BindingError("manifest", str(exc)) from exc
    stop = len(entries) if end is None else min(end, len(entries))

    def generate():
        for index in range(start, stop):
            entry = entries[index]
            try:
                hq = load_image(entry["hq_path"])
                raster = load_label_raster(entry["labels_path"])
                labels = PartLabelMap(labels=raster, legend=cfg.legend)
                result = degrade_sample(hq, labels, cfg, index)
            except BlurforgeError as exc:
                raise BindingError("degrade", str(exc),
                                   key=str(index)) from exc
            yield _view_from(hq, result)

    return generate()


def _view_from(hq: np.ndarray, result) -> SampleBatchView:
    record = json.loads(result.record.to_json())
    return SampleBatchView(
        hq=_to_view(hq),
        lq=_to_view(result.lq),
        hmb_mask=np.ascontiguousarray(result.mask, dtype=np.uint8),
        record=record,
    )


def _to_view(image: np.ndarray) -> np.ndarray:
    # snap to the 8-bit grid the CLI persists, then hand out float32
    return np.ascontiguousarray(dequantize_u8(quantize_u8(image)),
                                dtype=np.float32)


def _coerce_hq(hq_array) -> np.ndarray:
    hq = np.asarray(hq_array)
    if hq.ndim != 3 or hq.shape[2] != 3:
        raise BindingError("shape",
                           f"hq array must be (H, W, 3), got {hq.shape}")
    if hq.dtype == np.uint8:
        return dequantize_u8(hq)
    hq = hq.astype(np.float64)
    if hq.size and (hq.min() < 0.0 or hq.max() > 1.0):
        raise BindingError("range", "float hq values must lie in [0, 1]")
    return hq


def _coerce_labels(labels_array, hq_shape) -> np.ndarray:
    labels = np.asarray(labels_array)
    if labels.ndim != 2:
        raise BindingError("shape",
                           f"labels array must be 2-D, got {labels.shape}")
    if labels.shape != tuple(hq_shape):
        raise BindingError(
            "shape",
            f"labels shape {labels.shape} does not match hq {tuple(hq_shape)}")
    return labels.astype(np.uint8)


def _load_config(config_path):
    cfg, diagnostics = build_config(config_path)
    errors = [d for d in diagnostics if d.severity == "error"]
    if errors or cfg is None:
        first = errors[0] if errors else None
        raise BindingError("config",
                           first.message if first else "unparseable config",
                           key=first.key if first else None)
    return cfg
