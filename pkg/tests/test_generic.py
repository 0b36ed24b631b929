import numpy as np
import pytest
from scipy import ndimage

from blurforge.errors import DegenerateOutputError, InvalidParamsError
from blurforge.generic import (
    BlurRange,
    GenericParams,
    StageSkips,
    add_gaussian_noise,
    add_poisson_noise,
    apply_generic,
    apply_kernel,
    gaussian_kernel,
    jpeg_roundtrip,
    resize,
    sample_blur_kernel,
)
from blurforge.rng import derive_stream



# --- blur kernels -------------------------------------------------------

def test_isotropic_kernel_has_quarter_turn_symmetry():
    k = gaussian_kernel(15, 1.7, 1.7, rotation=0.9)
    np.testing.assert_allclose(k, np.rot90(k), atol=1e-9)


def test_sampled_kernels_are_normalized():
    rng = derive_stream(1, 0)
    for _ in range(50):
        k = sample_blur_kernel(BlurRange(), rng)
        assert k.min() >= 0.0
        assert abs(k.sum() - 1.0) <= 1e-9
        assert k.shape[0] % 2 == 1 and 7 <= k.shape[0] <= 21


def test_anisotropic_kernel_second_moments():
    k = gaussian_kernel(21, sigma_x=3.0, sigma_y=0.2, rotation=0.0)
    coords = np.arange(21, dtype=np.float64) - 10
    xx, yy = np.meshgrid(coords, coords)
    moment_x = float((k * xx * xx).sum())
    moment_y = float((k * yy * yy).sum())
    assert moment_x > moment_y


def test_kernel_validation():
    with pytest.raises(InvalidParamsError):
        gaussian_kernel(8, 1, 1, 0)
    with pytest.raises(InvalidParamsError):
        gaussian_kernel(9, 0, 1, 0)


# --- kernel application -------------------------------------------------

def test_apply_kernel_delta_identity(natural_image):
    delta = np.zeros((9, 9))
    delta[4, 4] = 1.0
    out = apply_kernel(natural_image, delta)
    assert np.abs(out - natural_image).max() <= 1e-6


def test_apply_kernel_constant_preserved():
    k = gaussian_kernel(9, 1.5, 0.5, 0.3)
    const = np.full((24, 24, 3), 0.6)
    np.testing.assert_allclose(apply_kernel(const, k), const, atol=1e-9)


def test_apply_kernel_matches_spatial_oracle():
    rng = np.random.default_rng(7)
    image = rng.uniform(size=(20, 20, 3))
    k = gaussian_kernel(7, 2.0, 0.7, 1.1)
    oracle = np.stack([ndimage.convolve(image[:, :, c], k, mode="reflect")
                       for c in range(3)], axis=-1)
    out = apply_kernel(image, k)
    assert np.abs(out - np.clip(oracle, 0, 1)).max() < 1e-6


# --- resize -------------------------------------------------------------

def test_resize_scale_one_bilinear_identity(natural_image):
    out = resize(natural_image, 1.0, "bilinear")
    assert out.shape == natural_image.shape
    assert np.abs(out - natural_image).max() <= 1e-6


def test_resize_constant_stays_constant():
    const = np.full((32, 32, 3), 0.3)
    for scale, filt in [(0.5, "area"), (0.75, "bilinear"), (1.25, "bicubic")]:
        out = resize(const, scale, filt)
        np.testing.assert_allclose(out, 0.3, atol=1e-9)


def test_resize_checkerboard_area_mean_pools():
    board = np.zeros((2, 2, 3))
    board[0, 1] = 1.0
    board[1, 0] = 1.0
    out = resize(board, 0.5, "area")
    assert out.shape == (1, 1, 3)
    np.testing.assert_allclose(out, 0.5, atol=1e-12)


def test_resize_dims_round():
    img = np.zeros((10, 20, 3))
    assert resize(img, 0.33).shape == (3, 7, 3)


def test_resize_degenerate_output_rejected():
    with pytest.raises(DegenerateOutputError):
        resize(np.zeros((4, 4, 3)), 0.1)
    with pytest.raises(InvalidParamsError):
        resize(np.zeros((4, 4, 3)), -1.0)


# --- noise --------------------------------------------------------------

def test_gaussian_noise_sigma_zero_identity(natural_image):
    out = add_gaussian_noise(natural_image, 0.0, derive_stream(0, 0))
    np.testing.assert_array_equal(out, natural_image)


def test_gaussian_noise_mean_and_variance():
    sigma = 0.02
    const = np.full((512, 512, 3), 0.5)
    out = add_gaussian_noise(const, sigma, derive_stream(5, 1))
    # CLT bound on the sample mean at N = 512^2 per channel
    assert abs(out.mean() - 0.5) <= 3 * sigma / 512
    noise = out - const
    assert abs(noise.var() - sigma**2) / sigma**2 < 0.05


def test_poisson_zero_pixels_stay_zero():
    img = np.zeros((64, 64, 3))
    out = add_poisson_noise(img, 2.0, derive_stream(9, 0))
    np.testing.assert_array_equal(out, img)


def test_poisson_preserves_expectation():
    img = np.full((1000, 1000, 1), 0.5)
    out = add_poisson_noise(img, 1.0, derive_stream(10, 0))
    assert abs(out.mean() - 0.5) <= 0.002


def test_poisson_variance_scales_with_counts():
    scale = 2.0
    lam = 255.0 / scale
    img = np.full((512, 512, 1), 0.5)
    out = add_poisson_noise(img, scale, derive_stream(11, 0))
    expected_var = 0.5 / lam
    assert abs(out.var() - expected_var) / expected_var < 0.05


# --- jpeg ---------------------------------------------------------------

def test_jpeg_q100_high_fidelity(natural_image):
    from blurforge.evaluate import psnr
    out = jpeg_roundtrip(natural_image, 100)
    assert psnr(natural_image, out) > 40.0


def test_jpeg_error_monotone_in_quality(natural_image):
    maes = [np.abs(jpeg_roundtrip(natural_image, q) - natural_image).mean()
            for q in (30, 50, 70, 90)]
    assert all(maes[i] >= maes[i + 1] for i in range(len(maes) - 1))


def test_jpeg_flat_gray_nearly_exact():
    flat = np.full((64, 64, 3), 0.5)
    out = jpeg_roundtrip(flat, 90)
    assert np.abs(out - flat).max() < 2 / 255


def test_jpeg_quality_validation():
    with pytest.raises(InvalidParamsError):
        jpeg_roundtrip(np.zeros((16, 16, 3)), 20)


# --- stage chain --------------------------------------------------------

def all_skip():
    return GenericParams(skips=StageSkips(blur=1.0, resize=1.0,
                                          noise=1.0, jpeg=1.0))


def test_apply_generic_all_skipped_is_identity(natural_image):
    out, draws, jpeg_bytes = apply_generic(natural_image, all_skip(),
                                            derive_stream(2, 2))
    np.testing.assert_array_equal(out, natural_image)
    assert draws == {"blur": None, "resize": None, "noise": None, "jpeg": None}
    assert jpeg_bytes is None


def test_apply_generic_deterministic(natural_image):
    params = GenericParams()
    out1, draws1, _ = apply_generic(natural_image, params, derive_stream(3, 4))
    out2, draws2, _ = apply_generic(natural_image, params, derive_stream(3, 4))
    np.testing.assert_array_equal(out1, out2)
    assert draws1 == draws2


def test_apply_generic_records_applied_stages(natural_image):
    params = GenericParams(skips=StageSkips(blur=0, resize=0, noise=0, jpeg=0))
    out, draws, jpeg_bytes = apply_generic(natural_image, params,
                                            derive_stream(4, 4))
    assert draws["blur"] is not None and draws["jpeg"] is not None
    assert draws["resize"] is not None and draws["noise"] is not None
    assert 30 <= draws["jpeg"]["quality"] <= 95
    assert out.min() >= 0.0 and out.max() <= 1.0
    # the returned bytes are the compressed form of the returned image
    from blurforge.image_io import decode_jpeg
    np.testing.assert_array_equal(decode_jpeg(jpeg_bytes), out)


def test_stage_outputs_stay_in_range(natural_image):
    rng = derive_stream(6, 6)
    params = GenericParams()
    for index in range(10):
        out, _, _ = apply_generic(natural_image, params, derive_stream(6, index))
        assert out.min() >= 0.0 and out.max() <= 1.0
