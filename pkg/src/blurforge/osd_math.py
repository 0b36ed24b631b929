"""Framework-free numeric kernels for one-step diffusion restoration.

Covers the noise schedule and its cumulative signal-retention factors,
the deterministic DDIM update, classifier-free guidance combination,
one-step noise-free latent recovery, the mask/pixel losses used to
supervise the prompt-guidance branches, and Sobel edge maps for
edge-aware perceptual distances. Everything is shape-agnostic
elementwise algebra over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    IndexOutOfRangeError,
    InvalidParamsError,
    InvalidTimestepOrderError,
    NegativeRadicandError,
    NegativeTermError,
    ShapeMismatchError,
)

SOBEL_MAGNITUDE_SCALE = 1.0 / (4.0 * math.sqrt(2.0))


@dataclass(frozen=True)
class NoiseSchedule:
    """Beta sequence with derived cumulative products abar_t = prod(1 - beta_s).

    Betas of exactly zero are tolerated (they leave abar unchanged);
    with strictly positive betas the abar sequence is strictly
    decreasing in (0, 1).
    """

    betas: tuple[float, ...]

    def __post_init__(self):
        betas = tuple(float(b) for b in self.betas)
        if len(betas) == 0:
            raise InvalidParamsError("schedule needs at least one beta")
        if any(not 0.0 <= b < 1.0 for b in betas):
            raise InvalidParamsError("betas must lie in [0, 1)")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(
            self, "alpha_bars", tuple(np.cumprod([1.0 - b for b in betas])))

    def __len__(self) -> int:
        return len(self.betas)


def alpha_bar(schedule: NoiseSchedule, t: int) -> float:
    """Signal retention after t noising steps; t = 0 is the clean state (1.0)."""
    if not 0 <= t <= len(schedule):
        raise IndexOutOfRangeError(
            f"t = {t} outside schedule of length {len(schedule)}")
    if t == 0:
        return 1.0
    return float(schedule.alpha_bars[t - 1])


def forward_noise(z: np.ndarray, eps: np.ndarray, a_bar: float) -> np.ndarray:
    """z_t = sqrt(abar) * z + sqrt(1 - abar) * eps."""
    z, eps = _check_same_shape(z, eps)
    _check_a_bar(a_bar)
    return math.sqrt(a_bar) * z + math.sqrt(1.0 - a_bar) * eps


def one_step_latent(z_t: np.ndarray, z_eps: np.ndarray,
                    a_bar_t: float) -> np.ndarray:
    """Noise-free latent: (z_t - sqrt(1 - abar) * z_eps) / sqrt(abar).

    Exact inverse of `forward_noise` when z_eps is the true noise.
    """
    z_t, z_eps = _check_same_shape(z_t, z_eps)
    _check_a_bar(a_bar_t)
    return (z_t - math.sqrt(1.0 - a_bar_t) * z_eps) / math.sqrt(a_bar_t)


def sigma_t(schedule: NoiseSchedule, t: int, t_prev: int, eta: float) -> float:
    """Stochasticity scale: eta^2 * (1-abar_prev)/(1-abar_t) * (1 - abar_t/abar_prev).

    Zero whenever eta is zero, which is the stable restoration setting.
    """
    a_t = alpha_bar(schedule, t)
    a_prev = alpha_bar(schedule, t_prev)
    _check_order(a_t, a_prev)
    if eta == 0.0:
        return 0.0
    if a_prev == 1.0:  # terminal step: no remaining noise budget
        return 0.0
    var = eta * eta * (1.0 - a_prev) / (1.0 - a_t) * (1.0 - a_t / a_prev)
    return math.sqrt(max(var, 0.0))


def cfg_combine(z_pos: np.ndarray, z_neg: np.ndarray,
                lambda_cfg: float) -> np.ndarray:
    """Guided noise estimate: z_neg + lambda * (z_pos - z_neg)."""
    z_pos, z_neg = _check_same_shape(z_pos, z_neg)
    return z_neg + lambda_cfg * (z_pos - z_neg)


def ddim_step(z_t: np.ndarray, z_eps: np.ndarray, schedule: NoiseSchedule,
              t: int, t_prev: int, eta: float = 0.0,
              fresh_noise: np.ndarray | None = None) -> np.ndarray:
    """One reverse update from timestep t to t_prev.

    z_prev = sqrt(abar_prev) * predicted_z0
           + sqrt(1 - abar_prev - sigma^2) * z_eps
           + sigma * fresh_noise

    With eta = 0 the step is deterministic and `fresh_noise` is ignored.
    A terminal step (abar_prev = 1) collapses to `one_step_latent`.
    """
    z_t, z_eps = _check_same_shape(z_t, z_eps)
    a_t = alpha_bar(schedule, t)
    a_prev = alpha_bar(schedule, t_prev)
    _check_order(a_t, a_prev)
    sigma = sigma_t(schedule, t, t_prev, eta)

    predicted_z0 = one_step_latent(z_t, z_eps, a_t)
    radicand = 1.0 - a_prev - sigma * sigma
    if radicand < -1e-12:
        raise NegativeRadicandError(
            f"1 - abar_prev - sigma^2 = {radicand} is negative")
    out = math.sqrt(a_prev) * predicted_z0 + math.sqrt(max(radicand, 0.0)) * z_eps
    if sigma > 0.0:
        if fresh_noise is None:
            raise InvalidParamsError("eta > 0 requires fresh_noise")
        fresh_noise, _ = _check_same_shape(fresh_noise, z_t)
        out = out + sigma * fresh_noise
    return out


@dataclass(frozen=True)
class CfgParams:
    lambda_cfg: float = 3.5
    eta: float = 0.0

    def __post_init__(self):
        if self.lambda_cfg < 0:
            raise InvalidParamsError("lambda_cfg must be >= 0")
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidParamsError("eta must be in [0, 1]")


def dice_loss(pred: np.ndarray, target: np.ndarray) -> float:
    """1 - 2 * sum(pred * target) / (sum(pred) + sum(target)); 0 when both empty."""
    pred, target = _check_same_shape(pred, target)
    denom = pred.sum() + target.sum()
    if denom == 0:
        return 0.0
    return float(1.0 - 2.0 * (pred * target).sum() / denom)


def l1_loss(a: np.ndarray, b: np.ndarray) -> float:
    a, b = _check_same_shape(a, b)
    return float(np.mean(np.abs(a - b)))


def mse_loss(a: np.ndarray, b: np.ndarray) -> float:
    a, b = _check_same_shape(a, b)
    return float(np.mean((a - b) ** 2))


def dpg_total_loss(l1_hq: float, l1_residual: float, dice: float,
                   alpha: float = 0.02) -> float:
    """Prompt-guidance objective: l1_hq + l1_residual + alpha * dice."""
    for name, value in (("l1_hq", l1_hq), ("l1_residual", l1_residual),
                        ("dice", dice)):
        if value < 0:
            raise NegativeTermError(f"{name} is negative: {value}")
    return l1_hq + l1_residual + alpha * dice


def sobel_edges(image: np.ndarray) -> np.ndarray:
    """Per-channel Sobel gradient magnitude, rescaled into [0, 1].

    Uses the standard 3x3 pair with reflect borders; the 1/(4*sqrt(2))
    factor maps the maximum response on [0,1] inputs to 1.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        return _sobel_single(image)
    return np.stack([_sobel_single(image[:, :, c])
                     for c in range(image.shape[2])], axis=-1)


def _sobel_single(channel: np.ndarray) -> np.ndarray:
    padded = np.pad(channel, 1, mode="symmetric")
    # Window taps around each pixel; w[dy][dx] is offset (dy-1, dx-1).
    w = [[padded[y:y + channel.shape[0], x:x + channel.shape[1]]
          for x in range(3)] for y in range(3)]
    gx = (w[0][2] + 2.0 * w[1][2] + w[2][2]) - (w[0][0] + 2.0 * w[1][0] + w[2][0])
    gy = (w[2][0] + 2.0 * w[2][1] + w[2][2]) - (w[0][0] + 2.0 * w[0][1] + w[0][2])
    return np.hypot(gx, gy) * SOBEL_MAGNITUDE_SCALE


def edge_aware_distance(dist_fn, a: np.ndarray, b: np.ndarray) -> float:
    """d(a, b) + d(S(a), S(b)) for any caller-supplied image distance d."""
    return dist_fn(a, b) + dist_fn(sobel_edges(a), sobel_edges(b))


def _check_same_shape(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"{a.shape} vs {b.shape}")
    return a, b


def _check_a_bar(a_bar: float) -> None:
    if not 0.0 < a_bar <= 1.0:
        raise InvalidParamsError(f"a_bar must be in (0, 1], got {a_bar}")


def _check_order(a_t: float, a_prev: float) -> None:
    if a_t > a_prev:
        raise InvalidTimestepOrderError(
            f"abar_t = {a_t} exceeds abar_prev = {a_prev}; "
            "the target step must be less noisy")
