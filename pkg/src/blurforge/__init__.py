"""blurforge: deterministic synthetic degradation for human-image restoration.

Generates paired LQ/HQ training samples containing body-part motion
blur and generic degradations, plus the numeric kernels (losses,
one-step diffusion sampling algebra) and evaluation metrics the
surrounding training stack needs.
"""

__version__ = "0.1.0"

from .config import Diagnostic, PipelineConfig, load_config, validate_config
from .errors import BlurforgeError
from .generic import (
    GenericParams,
    add_gaussian_noise,
    add_poisson_noise,
    apply_kernel,
    jpeg_roundtrip,
    resize,
    sample_blur_kernel,
)
from .hmb import (
    MorphParams,
    binarize,
    blend,
    dilate,
    erode,
    fft_convolve,
    gaussian_blur_map,
    make_weight_map,
)
from .image_io import load_image, save_image
from .manifest import SampleRecord
from .osd_math import (
    CfgParams,
    NoiseSchedule,
    alpha_bar,
    cfg_combine,
    ddim_step,
    dice_loss,
    dpg_total_loss,
    edge_aware_distance,
    forward_noise,
    l1_loss,
    mse_loss,
    one_step_latent,
    sigma_t,
    sobel_edges,
)
from .parts import PART_GROUPS, PartLabelMap
from .pipeline import SampleOutput, degrade_sample, run_batch
from .rng import RngStream, derive_stream
from .trajectory import (
    Trajectory,
    TrajectoryParams,
    rasterize_psf,
    simulate_trajectory,
)
from .evaluate import (
    DetectionCounts,
    hmb_ratio,
    manifest_stats,
    mask_dice,
    mask_iou,
    psnr,
)

__all__ = [
    "__version__",
    "BlurforgeError",
    "CfgParams",
    "Diagnostic",
    "DetectionCounts",
    "GenericParams",
    "MorphParams",
    "NoiseSchedule",
    "PART_GROUPS",
    "PartLabelMap",
    "PipelineConfig",
    "RngStream",
    "SampleOutput",
    "SampleRecord",
    "Trajectory",
    "TrajectoryParams",
    "add_gaussian_noise",
    "add_poisson_noise",
    "alpha_bar",
    "apply_kernel",
    "binarize",
    "blend",
    "cfg_combine",
    "ddim_step",
    "degrade_sample",
    "derive_stream",
    "dice_loss",
    "dilate",
    "dpg_total_loss",
    "edge_aware_distance",
    "erode",
    "fft_convolve",
    "forward_noise",
    "gaussian_blur_map",
    "hmb_ratio",
    "jpeg_roundtrip",
    "l1_loss",
    "load_config",
    "load_image",
    "make_weight_map",
    "manifest_stats",
    "mask_dice",
    "mask_iou",
    "mse_loss",
    "one_step_latent",
    "psnr",
    "rasterize_psf",
    "resize",
    "run_batch",
    "sample_blur_kernel",
    "save_image",
    "sigma_t",
    "simulate_trajectory",
    "sobel_edges",
    "validate_config",
]
