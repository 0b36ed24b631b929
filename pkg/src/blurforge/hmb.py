"""Weight-map construction and motion-blur blending.

The selected body-part indicator is shaped by grayscale morphology
(erode, dilate, Gaussian blur), min-max normalized to a coverage map P,
and inverted into the blend weight map w = 1 - P. The blurred image is
the circular FFT convolution of the sharp image with a PSF, and the
output is the per-pixel convex combination w * sharp + (1 - w) * blurred,
so the selected part receives the blur.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.fft import next_fast_len

from .errors import (
    EmptyGroupMaskError,
    InvalidParamsError,
    KernelTooLargeError,
    ShapeMismatchError,
)
from .parts import PartLabelMap


@dataclass(frozen=True)
class MorphParams:
    erode_radius: int = 1
    dilate_radius: int = 4
    gaussian_sigma: float = 3.0
    binarize_threshold: float = 0.5

    def __post_init__(self):
        if self.erode_radius < 0 or self.dilate_radius < 0:
            raise InvalidParamsError("morphology radii must be >= 0")
        if self.gaussian_sigma < 0:
            raise InvalidParamsError("gaussian_sigma must be >= 0")
        if not 0.0 < self.binarize_threshold < 1.0:
            raise InvalidParamsError("binarize_threshold must be in (0, 1)")


def disk_footprint(radius: int) -> np.ndarray:
    """Discrete disk: cells within Euclidean distance `radius` of the center."""
    if radius == 0:
        return np.ones((1, 1), dtype=bool)
    coords = np.arange(-radius, radius + 1)
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    return yy * yy + xx * xx <= radius * radius


def erode(mask: np.ndarray, radius: int) -> np.ndarray:
    """Grayscale erosion: minimum over the disk neighborhood."""
    if radius < 0:
        raise InvalidParamsError("radius must be >= 0")
    mask = np.asarray(mask, dtype=np.float64)
    if radius == 0:
        return mask.copy()
    return ndimage.grey_erosion(mask, footprint=disk_footprint(radius),
                                mode="reflect")


def dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    """Grayscale dilation; satisfies dilate(m) == 1 - erode(1 - m) exactly."""
    if radius < 0:
        raise InvalidParamsError("radius must be >= 0")
    mask = np.asarray(mask, dtype=np.float64)
    if radius == 0:
        return mask.copy()
    return ndimage.grey_dilation(mask, footprint=disk_footprint(radius),
                                 mode="reflect")


def gaussian_blur_map(mask: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian filter, kernel radius ceil(3*sigma), reflect borders."""
    if sigma < 0:
        raise InvalidParamsError("sigma must be >= 0")
    mask = np.asarray(mask, dtype=np.float64)
    if sigma == 0:
        return mask.copy()
    kernel = _gaussian_kernel_1d(sigma)
    out = ndimage.correlate1d(mask, kernel, axis=0, mode="reflect")
    out = ndimage.correlate1d(out, kernel, axis=1, mode="reflect")
    return np.clip(out, 0.0, 1.0)


def _gaussian_kernel_1d(sigma: float) -> np.ndarray:
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def minmax_normalize(field: np.ndarray) -> np.ndarray:
    """Scale to [0, 1]; a flat nonzero field maps to all ones.

    A flat zero field has no meaningful normalization and is rejected.
    """
    lo = float(field.min())
    hi = float(field.max())
    if hi == lo:
        if hi == 0.0:
            raise EmptyGroupMaskError("coverage map is identically zero")
        return np.ones_like(field)
    return (field - lo) / (hi - lo)


def make_weight_map(labels: PartLabelMap, group: str,
                    morph: MorphParams) -> np.ndarray:
    """Blend weight map for `group`: w = 1 - Norm(G(D(E(indicator)))).

    The selected part has weight near 0 (receives the blurred image);
    the rest of the frame has weight near 1 (stays sharp). Min-max
    normalization guarantees the coverage map peaks at exactly 1, so a
    successful call always produces a nonempty binarized mask.
    """
    indicator = labels.group_indicator(group)
    if indicator.sum() == 0:
        raise EmptyGroupMaskError(f"group {group!r} covers zero pixels")
    shaped = erode(indicator, morph.erode_radius)
    shaped = dilate(shaped, morph.dilate_radius)
    shaped = gaussian_blur_map(shaped, morph.gaussian_sigma)
    coverage = minmax_normalize(shaped)
    return 1.0 - coverage


def fft_convolve(image: np.ndarray, psf: np.ndarray,
                 mode: str = "circular") -> np.ndarray:
    """Per-channel convolution with the PSF, computed in the frequency domain.

    `circular` is plain wraparound convolution with the kernel centered
    at the origin. `reflect` symmetric-pads by the kernel radius first
    and crops, suppressing border wraparound on real photos.
    """
    image = np.asarray(image, dtype=np.float64)
    psf = np.asarray(psf, dtype=np.float64)
    if psf.ndim != 2 or psf.shape[0] != psf.shape[1]:
        raise InvalidParamsError(f"psf must be square, got {psf.shape}")
    side = psf.shape[0]
    h, w = image.shape[:2]
    if side > min(h, w):
        raise KernelTooLargeError(
            f"kernel side {side} exceeds image min dimension {min(h, w)}")
    if mode == "circular":
        return np.clip(_circular_fft(image, psf), 0.0, 1.0)
    if mode == "reflect":
        radius = (side - 1) // 2
        spatial = [(radius, radius), (radius, radius)]
        padded = np.pad(image, spatial + [(0, 0)] * (image.ndim - 2),
                        mode="symmetric")
        # Zero-pad past the reflect margin up to a fast FFT length; the
        # cropped interior only sees values within `radius` of itself,
        # so the extra border cannot reach it.
        grow_h = next_fast_len(padded.shape[0]) - padded.shape[0]
        grow_w = next_fast_len(padded.shape[1]) - padded.shape[1]
        if grow_h or grow_w:
            padded = np.pad(padded, [(0, grow_h), (0, grow_w)]
                            + [(0, 0)] * (image.ndim - 2))
        out = _circular_fft(padded, psf)
        out = out[radius:radius + h, radius:radius + w]
        return np.clip(out, 0.0, 1.0)
    raise ValueError(f"unknown convolution mode: {mode!r}")


def _circular_fft(image: np.ndarray, psf: np.ndarray) -> np.ndarray:
    h, w = image.shape[:2]
    side = psf.shape[0]
    radius = (side - 1) // 2
    kernel = np.zeros((h, w), dtype=np.float64)
    kernel[:side, :side] = psf
    kernel = np.roll(kernel, (-radius, -radius), axis=(0, 1))
    kernel_f = np.fft.rfft2(kernel)
    if image.ndim == 3:
        kernel_f = kernel_f[:, :, None]
        image_f = np.fft.rfft2(image, axes=(0, 1))
        return np.fft.irfft2(image_f * kernel_f, s=(h, w), axes=(0, 1))
    return np.fft.irfft2(np.fft.rfft2(image) * kernel_f, s=(h, w))


def blend(sharp: np.ndarray, blurred: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Elementwise convex combination w * sharp + (1 - w) * blurred."""
    sharp = np.asarray(sharp, dtype=np.float64)
    blurred = np.asarray(blurred, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if sharp.shape != blurred.shape:
        raise ShapeMismatchError(
            f"sharp {sharp.shape} vs blurred {blurred.shape}")
    if w.shape != sharp.shape[:2]:
        raise ShapeMismatchError(
            f"weight map {w.shape} vs image {sharp.shape[:2]}")
    weight = w[:, :, None] if sharp.ndim == 3 else w
    return weight * sharp + (1.0 - weight) * blurred


def binarize(coverage: np.ndarray, threshold: float) -> np.ndarray:
    """Threshold the part-coverage map P = 1 - w into a {0,1} uint8 mask.

    Pixels with coverage >= threshold are marked 1.
    """
    if not 0.0 < threshold < 1.0:
        raise InvalidParamsError(f"threshold must be in (0, 1), got {threshold}")
    return (np.asarray(coverage) >= threshold).astype(np.uint8)
