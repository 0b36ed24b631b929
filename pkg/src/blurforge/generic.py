"""Generic degradation stages: blur, resize, noise, JPEG compression.

Stage parameter ranges follow the common blind-restoration recipe,
rescaled to [0, 1] intensities. `apply_generic` runs the four stages in
order with per-stage skip probabilities and returns both the degraded
image and a record of every value it drew, so a sample can be replayed
bit-exactly from its manifest entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import cv2
import numpy as np

from . import image_io
from .errors import DegenerateOutputError, InvalidParamsError
from .hmb import fft_convolve
from .rng import RngStream

POISSON_BASE_COUNTS = 255.0

_CV_FILTERS = {
    "area": cv2.INTER_AREA,
    "bilinear": cv2.INTER_LINEAR,
    "bicubic": cv2.INTER_CUBIC,
    "nearest": cv2.INTER_NEAREST,
}


@dataclass(frozen=True)
class BlurRange:
    kernel_size: tuple[int, int] = (7, 21)       # odd sizes, inclusive
    sigma: tuple[float, float] = (0.2, 3.0)
    isotropic_prob: float = 0.6

    def __post_init__(self):
        lo, hi = self.kernel_size
        if lo % 2 == 0 or hi % 2 == 0 or lo < 3 or hi < lo:
            raise InvalidParamsError(f"bad kernel_size range {self.kernel_size}")
        if not 0 < self.sigma[0] <= self.sigma[1]:
            raise InvalidParamsError(f"bad sigma range {self.sigma}")
        if not 0.0 <= self.isotropic_prob <= 1.0:
            raise InvalidParamsError("isotropic_prob must be in [0,1]")


@dataclass(frozen=True)
class ResizeRange:
    scale: tuple[float, float] = (0.25, 1.5)
    filters: tuple[str, ...] = ("area", "bilinear", "bicubic")

    def __post_init__(self):
        if not 0 < self.scale[0] <= self.scale[1]:
            raise InvalidParamsError(f"bad scale range {self.scale}")
        unknown = set(self.filters) - set(_CV_FILTERS)
        if unknown:
            raise InvalidParamsError(f"unknown resize filters: {sorted(unknown)}")


@dataclass(frozen=True)
class NoiseRange:
    gaussian_sigma: tuple[float, float] = (0.004, 0.06)
    poisson_scale: tuple[float, float] = (0.05, 2.0)
    gaussian_prob: float = 0.5

    def __post_init__(self):
        if not 0 <= self.gaussian_sigma[0] <= self.gaussian_sigma[1]:
            raise InvalidParamsError(f"bad gaussian_sigma range {self.gaussian_sigma}")
        if not 0 < self.poisson_scale[0] <= self.poisson_scale[1]:
            raise InvalidParamsError(f"bad poisson_scale range {self.poisson_scale}")
        if not 0.0 <= self.gaussian_prob <= 1.0:
            raise InvalidParamsError("gaussian_prob must be in [0,1]")


@dataclass(frozen=True)
class JpegRange:
    quality: tuple[int, int] = (30, 95)

    def __post_init__(self):
        lo, hi = self.quality
        if not 1 <= lo <= hi <= 100:
            raise InvalidParamsError(f"bad quality range {self.quality}")


@dataclass(frozen=True)
class StageSkips:
    blur: float = 0.1
    resize: float = 0.0
    noise: float = 0.1
    jpeg: float = 0.0

    def __post_init__(self):
        for name in ("blur", "resize", "noise", "jpeg"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise InvalidParamsError(f"skip prob {name} must be in [0,1]")


@dataclass(frozen=True)
class GenericParams:
    blur: BlurRange = field(default_factory=BlurRange)
    resize: ResizeRange = field(default_factory=ResizeRange)
    noise: NoiseRange = field(default_factory=NoiseRange)
    jpeg: JpegRange = field(default_factory=JpegRange)
    skips: StageSkips = field(default_factory=StageSkips)


def gaussian_kernel(size: int, sigma_x: float, sigma_y: float,
                    rotation: float) -> np.ndarray:
    """Anisotropic Gaussian kernel with the given axis sigmas and rotation."""
    if size < 3 or size % 2 == 0:
        raise InvalidParamsError(f"kernel size must be odd and >= 3, got {size}")
    if sigma_x <= 0 or sigma_y <= 0:
        raise InvalidParamsError("sigmas must be positive")
    radius = (size - 1) // 2
    coords = np.arange(-radius, radius + 1, dtype=np.float64)
    xx, yy = np.meshgrid(coords, coords)
    cos_t, sin_t = math.cos(rotation), math.sin(rotation)
    # Rotate into kernel axes, then apply the diagonal precision matrix.
    u = cos_t * xx + sin_t * yy
    v = -sin_t * xx + cos_t * yy
    weights = np.exp(-0.5 * ((u / sigma_x) ** 2 + (v / sigma_y) ** 2))
    return weights / weights.sum()


def draw_blur_params(params: BlurRange, rng: RngStream) -> dict:
    lo, hi = params.kernel_size
    size = int(rng.choice(np.arange(lo, hi + 1, 2)))
    isotropic = bool(rng.uniform() < params.isotropic_prob)
    sigma_x = float(rng.uniform(*params.sigma))
    if isotropic:
        sigma_y, rotation = sigma_x, 0.0
    else:
        sigma_y = float(rng.uniform(*params.sigma))
        rotation = float(rng.uniform(0.0, math.pi))
    return {"kernel_size": size, "sigma_x": sigma_x, "sigma_y": sigma_y,
            "rotation": rotation, "isotropic": isotropic}


def sample_blur_kernel(params: BlurRange, rng: RngStream) -> np.ndarray:
    draw = draw_blur_params(params, rng)
    return gaussian_kernel(draw["kernel_size"], draw["sigma_x"],
                           draw["sigma_y"], draw["rotation"])


def apply_kernel(image: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Blur with reflect borders; generic blur is not tied to wraparound."""
    return fft_convolve(image, kernel, mode="reflect")


def resize(image: np.ndarray, scale: float, filter: str | None = None) -> np.ndarray:
    """Rescale to round(dims * scale); area filter by default when shrinking."""
    if scale <= 0:
        raise InvalidParamsError(f"scale must be positive, got {scale}")
    h, w = image.shape[:2]
    out_h, out_w = round(h * scale), round(w * scale)
    if out_h < 1 or out_w < 1:
        raise DegenerateOutputError(
            f"scale {scale} collapses {h}x{w} to {out_h}x{out_w}")
    if filter is None:
        filter = "area" if scale < 1.0 else "bilinear"
    if filter not in _CV_FILTERS:
        raise InvalidParamsError(f"unknown resize filter: {filter!r}")
    out = cv2.resize(image, (out_w, out_h), interpolation=_CV_FILTERS[filter])
    return np.clip(out, 0.0, 1.0)


def resize_to(image: np.ndarray, size: tuple[int, int],
              filter: str = "bicubic") -> np.ndarray:
    """Resize to exact (height, width); identity when dims already match."""
    h, w = image.shape[:2]
    if (h, w) == tuple(size):
        return image
    out = cv2.resize(image, (size[1], size[0]),
                     interpolation=_CV_FILTERS[filter])
    return np.clip(out, 0.0, 1.0)


def add_gaussian_noise(image: np.ndarray, sigma: float,
                       rng: RngStream) -> np.ndarray:
    if sigma < 0:
        raise InvalidParamsError("sigma must be >= 0")
    if sigma == 0:
        return np.asarray(image, dtype=np.float64).copy()
    noise = sigma * rng.standard_normal(image.shape)
    return np.clip(image + noise, 0.0, 1.0)


def add_poisson_noise(image: np.ndarray, scale: float,
                      rng: RngStream) -> np.ndarray:
    """Shot noise: pixel -> Poisson(pixel * L) / L with L = 255 / scale.

    Larger scale means fewer effective counts and stronger noise.
    """
    if scale <= 0:
        raise InvalidParamsError("scale must be positive")
    lam = POISSON_BASE_COUNTS / scale
    counts = rng.poisson(np.clip(image, 0.0, 1.0) * lam)
    return np.clip(counts / lam, 0.0, 1.0)


def jpeg_roundtrip(image: np.ndarray, quality: int,
                   rng: RngStream | None = None) -> np.ndarray:
    """Encode/decode through the pinned baseline codec. `rng` is unused."""
    if not 30 <= quality <= 100:
        raise InvalidParamsError(f"quality must be in [30, 100], got {quality}")
    return image_io.decode_jpeg(image_io.encode_jpeg(image, quality))


def apply_generic(image: np.ndarray, params: GenericParams,
                  rng: RngStream) -> tuple[np.ndarray, dict, bytes | None]:
    """Run blur -> resize -> noise -> jpeg, each skippable, recording draws.

    The returned dict maps stage name to its drawn parameters, or None
    for skipped stages; the draw order is part of the replay contract.
    The third element holds the exact encoded bytes of the jpeg stage
    (None when skipped), so callers can persist the compressed form
    without a second, non-identical encode.
    """
    draws: dict = {"blur": None, "resize": None, "noise": None, "jpeg": None}
    jpeg_bytes: bytes | None = None

    if rng.uniform() >= params.skips.blur:
        blur = draw_blur_params(params.blur, rng)
        kernel = gaussian_kernel(blur["kernel_size"], blur["sigma_x"],
                                 blur["sigma_y"], blur["rotation"])
        image = apply_kernel(image, kernel)
        draws["blur"] = blur

    if rng.uniform() >= params.skips.resize:
        scale = float(rng.uniform(*params.resize.scale))
        filt = rng.choice(params.resize.filters)
        image = resize(image, scale, filt)
        draws["resize"] = {"scale": scale, "filter": filt}

    if rng.uniform() >= params.skips.noise:
        if rng.uniform() < params.noise.gaussian_prob:
            sigma = float(rng.uniform(*params.noise.gaussian_sigma))
            image = add_gaussian_noise(image, sigma, rng)
            draws["noise"] = {"kind": "gaussian", "sigma": sigma}
        else:
            scale = float(rng.uniform(*params.noise.poisson_scale))
            image = add_poisson_noise(image, scale, rng)
            draws["noise"] = {"kind": "poisson", "scale": scale}

    if rng.uniform() >= params.skips.jpeg:
        lo, hi = params.jpeg.quality
        quality = int(rng.integers(lo, hi + 1))
        jpeg_bytes = image_io.encode_jpeg(image, quality)
        image = image_io.decode_jpeg(jpeg_bytes)
        draws["jpeg"] = {"quality": quality}

    return image, draws, jpeg_bytes
