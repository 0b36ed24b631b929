"""Raster I/O: PNG via OpenCV, JPEG via the bundled Pillow codec.

Images travel through the pipeline as float64 RGB arrays in [0, 1];
quantization happens only here, at file boundaries. JPEG encoding is
pinned to Pillow's libjpeg build with explicit subsampling (4:2:0 below
quality 90, 4:4:4 at or above) so sample replay is bit-stable.
"""

from __future__ import annotations

import io
import os
from pathlib import Path

import cv2
import numpy as np
from PIL import Image as PilImage

from .errors import (
    DecodeError,
    EncodeError,
    IoError,
    NotFoundError,
    UnsupportedBitDepthError,
)

JPEG_HIGH_QUALITY_THRESHOLD = 90  # 4:4:4 at/above, 4:2:0 below


def quantize_u8(image: np.ndarray) -> np.ndarray:
    """Round a [0,1] float image to the 8-bit grid."""
    return np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)


def dequantize_u8(raw: np.ndarray) -> np.ndarray:
    return raw.astype(np.float64) / 255.0


def load_image(path) -> np.ndarray:
    """Load an 8- or 16-bit RGB raster as float64 (H, W, 3) in [0, 1]."""
    path = Path(path)
    if not path.is_file():
        raise NotFoundError(f"no such image file: {path}")
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise DecodeError(f"could not decode raster: {path}")
    if raw.ndim != 3 or raw.shape[2] not in (3, 4):
        raise DecodeError(
            f"expected an RGB raster, got shape {raw.shape}: {path}")
    if raw.shape[2] == 4:
        raw = raw[:, :, :3]
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise UnsupportedBitDepthError(
            f"unsupported sample type {raw.dtype} (want uint8/uint16): {path}")
    rgb = cv2.cvtColor(raw, cv2.COLOR_BGR2RGB)
    return rgb.astype(np.float64) / scale


def save_image(image: np.ndarray, path, *, format: str = "png",
               quality: int = 95) -> None:
    """Write an image as lossless PNG (default) or JPEG at `quality`.

    PNG round-trips the 8-bit-quantized values exactly.
    """
    path = Path(path)
    if format == "png":
        bgr = cv2.cvtColor(quantize_u8(image), cv2.COLOR_RGB2BGR)
        if not cv2.imwrite(str(path), bgr):
            raise IoError(f"failed to write PNG: {path}")
    elif format == "jpeg":
        data = encode_jpeg(image, quality)
        try:
            path.write_bytes(data)
        except OSError as exc:
            raise IoError(f"failed to write JPEG: {path}") from exc
    else:
        raise ValueError(f"unknown image format: {format!r}")


def encode_jpeg(image: np.ndarray, quality: int) -> bytes:
    """Encode with the pinned baseline codec; see module docstring."""
    subsampling = 0 if quality >= JPEG_HIGH_QUALITY_THRESHOLD else 2
    buf = io.BytesIO()
    try:
        PilImage.fromarray(quantize_u8(image)).save(
            buf, format="jpeg", quality=int(quality), subsampling=subsampling)
    except Exception as exc:
        raise EncodeError(f"jpeg encode failed: {exc}") from exc
    return buf.getvalue()


def decode_jpeg(data: bytes) -> np.ndarray:
    try:
        with PilImage.open(io.BytesIO(data)) as img:
            rgb = np.asarray(img.convert("RGB"))
    except Exception as exc:
        raise DecodeError(f"jpeg decode failed: {exc}") from exc
    return dequantize_u8(rgb)


def save_mask(mask: np.ndarray, path) -> None:
    """Write a {0,1} mask as an 8-bit grayscale PNG with values {0,255}."""
    raw = (np.asarray(mask) > 0).astype(np.uint8) * 255
    if not cv2.imwrite(str(Path(path)), raw):
        raise IoError(f"failed to write mask PNG: {path}")


def load_mask(path) -> np.ndarray:
    """Load a {0,255} grayscale PNG back to a {0,1} uint8 mask."""
    path = Path(path)
    if not path.is_file():
        raise NotFoundError(f"no such mask file: {path}")
    raw = cv2.imread(str(path), cv2.IMREAD_GRAYSCALE)
    if raw is None:
        raise DecodeError(f"could not decode mask: {path}")
    return (raw > 127).astype(np.uint8)


def load_label_raster(path) -> np.ndarray:
    """Load an 8-bit grayscale PNG of small-integer part labels."""
    path = Path(path)
    if not path.is_file():
        raise NotFoundError(f"no such label file: {path}")
    raw = cv2.imread(str(path), cv2.IMREAD_GRAYSCALE)
    if raw is None:
        raise DecodeError(f"could not decode label raster: {path}")
    return raw.astype(np.uint8)


def save_label_raster(labels: np.ndarray, path) -> None:
    if not cv2.imwrite(str(Path(path)), np.asarray(labels, dtype=np.uint8)):
        raise IoError(f"failed to write label raster: {path}")


def save_gray16(field: np.ndarray, path) -> None:
    """Write a nonnegative scalar field as a max-normalized 16-bit PNG.

    Used by `preview` to dump PSFs and weight maps for inspection.
    """
    field = np.asarray(field, dtype=np.float64)
    peak = field.max()
    scaled = field / peak if peak > 0 else field
    raw = np.round(scaled * 65535.0).astype(np.uint16)
    if not cv2.imwrite(str(Path(path)), raw):
        raise IoError(f"failed to write 16-bit PNG: {path}")


def ensure_dir(path) -> Path:
    path = Path(path)
    os.makedirs(path, exist_ok=True)
    return path
