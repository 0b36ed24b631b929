import numpy as np
import pytest

from blurforge.errors import EmptyTrajectoryError, InvalidParamsError
from blurforge.rng import derive_stream
from blurforge.trajectory import (
    Trajectory,
    TrajectoryParams,
    _splat_bilinear,
    rasterize_psf,
    simulate_trajectory,
)


def test_degenerate_params_give_stationary_trajectory():
    params = TrajectoryParams(inertia=0.0, perturbation_sigma=0.0,
                              big_shake_prob=0.0)
    traj = simulate_trajectory(params, derive_stream(0, 0))
    np.testing.assert_array_equal(traj.points, np.full((256, 2), 32.0))


def test_same_stream_gives_identical_trajectories():
    params = TrajectoryParams()
    a = simulate_trajectory(params, derive_stream(11, 4))
    b = simulate_trajectory(params, derive_stream(11, 4))
    np.testing.assert_array_equal(a.points, b.points)


def test_recentered_points_rarely_leave_canvas():
    # Monte-Carlo containment check; the full 10k-trajectory measurement
    # gave 0.05% outside, so 1% has a wide margin.
    rng = derive_stream(123, 0)
    outside = total = 0
    for _ in range(1000):
        msl = rng.uniform(2.0, 16.0)
        params = TrajectoryParams.with_step_length(msl)
        pts = simulate_trajectory(params, rng).points
        outside += int(((pts < 0) | (pts > params.canvas)).any(axis=1).sum())
        total += len(pts)
    assert outside / total < 0.01


def test_trajectory_mean_sits_at_canvas_center():
    traj = simulate_trajectory(TrajectoryParams(), derive_stream(5, 5))
    np.testing.assert_allclose(traj.points.mean(axis=0), [32.0, 32.0],
                               atol=1e-9)


@pytest.mark.parametrize("kwargs", [
    {"num_steps": 1}, {"canvas": 4}, {"max_step_length": 0},
    {"inertia": 1.5}, {"perturbation_sigma": -1}, {"big_shake_prob": 2},
    {"centripetal_gain": -0.1},
])
def test_invalid_params_rejected(kwargs):
    with pytest.raises(InvalidParamsError):
        TrajectoryParams(**kwargs)


def test_stationary_trajectory_rasterizes_to_delta():
    traj = Trajectory(points=np.full((64, 2), 32.0), canvas=64)
    psf = rasterize_psf(traj, 15)
    expected = np.zeros((15, 15))
    expected[7, 7] = 1.0
    np.testing.assert_allclose(psf, expected, atol=1e-12)


def test_axis_aligned_line_gives_uniform_streak():
    # Five unit-spaced points along x at integer y: 1/5 in each covered
    # cell of a single row (hand-computed bilinear splat).
    xs = np.arange(30.0, 35.0)
    pts = np.stack([xs, np.full(5, 32.0)], axis=1)
    psf = rasterize_psf(Trajectory(points=pts, canvas=64), 15)
    expected = np.zeros((15, 15))
    expected[7, 5:10] = 0.2
    np.testing.assert_allclose(psf, expected, atol=1e-12)


def test_psf_normalized_and_nonnegative_across_seeds():
    rng = derive_stream(99, 0)
    for _ in range(100):
        msl = rng.uniform(2.0, 16.0)
        traj = simulate_trajectory(TrajectoryParams.with_step_length(msl), rng)
        psf = rasterize_psf(traj, 63)
        assert psf.min() >= 0.0
        assert abs(psf.sum() - 1.0) <= 1e-9


def test_integer_shift_translates_psf():
    rng = derive_stream(31, 7)
    traj = simulate_trajectory(TrajectoryParams(max_step_length=3.0,
                                                perturbation_sigma=0.9), rng)
    base = rasterize_psf(traj, 63)
    shifted = Trajectory(points=traj.points + np.array([3.0, -2.0]), canvas=64)
    moved = rasterize_psf(shifted, 63)
    np.testing.assert_allclose(np.roll(base, (-2, 3), axis=(0, 1)), moved,
                               atol=1e-12)


def test_full_exposure_deposits_one_unit_per_step():
    rng = derive_stream(17, 0)
    traj = simulate_trajectory(TrajectoryParams(), rng)
    shift = (63 - 1) / 2.0 - traj.canvas / 2.0
    grid = _splat_bilinear(traj.points + shift, 63)
    assert abs(grid.sum() - len(traj)) <= 1e-9 * len(traj)


def test_partial_exposure_uses_only_leading_points():
    pts = np.array([[30.0, 32.0]] * 3 + [[40.0, 40.0]] * 3)
    psf = rasterize_psf(Trajectory(points=pts, canvas=64), 31,
                        exposure_fraction=0.5)
    # ceil(0.5 * 6) = 3 points, all at the first location
    assert psf[32 - 32 + 15, 30 - 32 + 15] == 1.0


def test_rasterize_validation():
    traj = Trajectory(points=np.zeros((0, 2)), canvas=64)
    with pytest.raises(EmptyTrajectoryError):
        rasterize_psf(traj, 15)
    good = Trajectory(points=np.full((4, 2), 32.0), canvas=64)
    with pytest.raises(InvalidParamsError):
        rasterize_psf(good, 14)
    with pytest.raises(InvalidParamsError):
        rasterize_psf(good, 15, exposure_fraction=0.0)
