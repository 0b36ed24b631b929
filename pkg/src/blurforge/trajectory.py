"""Random motion trajectories and their rasterization into blur kernels.

A trajectory is a damped random walk: velocity keeps a fraction of its
previous value (inertia), picks up Gaussian perturbations, is pulled
back toward the canvas center by a spring term, and occasionally
receives a large direction-reversing impulse (a "shake"). Integrating
the visited positions over the exposure and splatting them bilinearly
onto a pixel grid yields the point spread function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyTrajectoryError, InvalidParamsError
from .rng import RngStream

# Spring normalization: pull = -gain * (pos - center) * PULL_SCALE * msl / canvas.
# Calibrated by Monte-Carlo (10k trajectories, default params, step lengths
# in [2, 16]) so that < 0.1% of re-centered points leave the canvas.
PULL_SCALE = 2.0

# Default fraction of max_step_length used as perturbation sigma when a
# caller builds params from a step length alone.
SIGMA_FACTOR = 0.3


@dataclass(frozen=True)
class TrajectoryParams:
    num_steps: int = 256
    canvas: int = 64
    max_step_length: float = 8.0
    inertia: float = 0.7
    perturbation_sigma: float = SIGMA_FACTOR * 8.0
    big_shake_prob: float = 0.2
    centripetal_gain: float = 0.7

    def __post_init__(self):
        if self.num_steps < 2:
            raise InvalidParamsError(f"num_steps must be >= 2, got {self.num_steps}")
        if self.canvas < 8:
            raise InvalidParamsError(f"canvas must be >= 8, got {self.canvas}")
        if self.max_step_length <= 0:
            raise InvalidParamsError("max_step_length must be positive")
        if not 0.0 <= self.inertia <= 1.0:
            raise InvalidParamsError(f"inertia must be in [0,1], got {self.inertia}")
        if self.perturbation_sigma < 0:
            raise InvalidParamsError("perturbation_sigma must be >= 0")
        if not 0.0 <= self.big_shake_prob <= 1.0:
            raise InvalidParamsError("big_shake_prob must be in [0,1]")
        if self.centripetal_gain < 0:
            raise InvalidParamsError("centripetal_gain must be >= 0")

    @classmethod
    def with_step_length(cls, max_step_length: float, **overrides) -> "TrajectoryParams":
        """Build params for a sampled step length, scaling sigma with it."""
        overrides.setdefault("perturbation_sigma", SIGMA_FACTOR * max_step_length)
        return cls(max_step_length=max_step_length, **overrides)


@dataclass(frozen=True)
class Trajectory:
    """Continuous (x, y) positions in canvas coordinates."""

    points: np.ndarray
    canvas: int

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 2:
            raise InvalidParamsError(
                f"points must have shape (n, 2), got {points.shape}")
        if not np.isfinite(points).all():
            raise InvalidParamsError("trajectory contains non-finite points")
        object.__setattr__(self, "points", points)

    def __len__(self) -> int:
        return len(self.points)


def simulate_trajectory(params: TrajectoryParams, rng: RngStream) -> Trajectory:
    """Run the velocity process and re-center the result on the canvas.

    Each step draws, in order: one uniform (shake trigger), two standard
    normals (perturbation), and one uniform for the shake jitter when
    triggered. Velocity magnitude is capped at max_step_length.
    """
    n = params.num_steps
    center = params.canvas / 2.0
    msl = params.max_step_length
    spring = params.centripetal_gain * PULL_SCALE * msl / params.canvas

    pts = np.empty((n, 2), dtype=np.float64)
    pos = np.array([center, center])
    vel = np.zeros(2)
    pts[0] = pos
    for k in range(1, n):
        shake_u = rng.uniform()
        noise = params.perturbation_sigma * rng.standard_normal(2)
        impulse = 0.0
        if shake_u < params.big_shake_prob:
            angle = math.atan2(vel[1], vel[0]) + math.pi + rng.uniform(-0.5, 0.5)
            magnitude = 2.0 * math.hypot(vel[0], vel[1])
            impulse = magnitude * np.array([math.cos(angle), math.sin(angle)])
        pull = -spring * (pos - center)
        vel = params.inertia * vel + noise + impulse + pull
        speed = math.hypot(vel[0], vel[1])
        if speed > msl:
            vel = vel * (msl / speed)
        pos = pos + vel
        pts[k] = pos

    pts = pts - pts.mean(axis=0) + center
    return Trajectory(points=pts, canvas=params.canvas)


def rasterize_psf(traj: Trajectory, size: int,
                  exposure_fraction: float = 1.0) -> np.ndarray:
    """Splat the exposed trajectory prefix into a normalized size x size kernel.

    Each exposed point deposits unit mass, split bilinearly over the four
    surrounding cells; positions outside the kernel are clamped to the
    border so no mass is lost. The kernel center coincides with the
    canvas center.
    """
    if size < 3 or size % 2 == 0:
        raise InvalidParamsError(f"kernel size must be odd and >= 3, got {size}")
    if not 0.0 < exposure_fraction <= 1.0:
        raise InvalidParamsError(
            f"exposure_fraction must be in (0, 1], got {exposure_fraction}")
    if len(traj) == 0:
        raise EmptyTrajectoryError("cannot rasterize an empty trajectory")

    n_exposed = math.ceil(exposure_fraction * len(traj))
    shift = (size - 1) / 2.0 - traj.canvas / 2.0
    pts = traj.points[:n_exposed] + shift
    grid = _splat_bilinear(pts, size)
    return grid / grid.sum()


def _splat_bilinear(points: np.ndarray, size: int) -> np.ndarray:
    """Deposit unit mass per point; total mass equals len(points)."""
    grid = np.zeros((size, size), dtype=np.float64)
    xs = np.clip(points[:, 0], 0.0, size - 1.0)
    ys = np.clip(points[:, 1], 0.0, size - 1.0)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    fx = xs - x0
    fy = ys - y0
    x1 = np.minimum(x0 + 1, size - 1)
    y1 = np.minimum(y0 + 1, size - 1)
    np.add.at(grid, (y0, x0), (1 - fx) * (1 - fy))
    np.add.at(grid, (y0, x1), fx * (1 - fy))
    np.add.at(grid, (y1, x0), (1 - fx) * fy)
    np.add.at(grid, (y1, x1), fx * fy)
    return grid


def validate_psf(psf: np.ndarray, tol: float = 1e-9) -> None:
    """Raise if `psf` is not a normalized, odd-sided, nonnegative kernel."""
    psf = np.asarray(psf)
    if psf.ndim != 2 or psf.shape[0] != psf.shape[1] or psf.shape[0] % 2 == 0:
        raise InvalidParamsError(f"psf must be square with odd side, got {psf.shape}")
    if psf.min() < 0:
        raise InvalidParamsError("psf has negative weights")
    if abs(psf.sum() - 1.0) > tol:
        raise InvalidParamsError(f"psf sum {psf.sum()} deviates from 1")
