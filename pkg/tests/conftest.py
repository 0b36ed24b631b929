import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from blurforge.parts import PartLabelMap


def make_natural_image(height=96, width=96, seed=42):
    """Smooth gradients plus low-pass texture; stands in for a photo."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width] / max(height, width)
    base = np.stack([
        0.5 + 0.4 * np.sin(2 * np.pi * (xx + 0.3 * yy)),
        0.5 + 0.3 * np.cos(2 * np.pi * (yy * 1.3 + 0.1)),
        0.4 + 0.2 * xx * yy,
    ], axis=-1)
    texture = gaussian_filter(rng.normal(0, 0.15, (height, width, 3)),
                              sigma=(2, 2, 0))
    return np.clip(base + texture, 0.0, 1.0)


def make_person_labels(height=96, width=96):
    """Stylized figure raster covering all five regional part groups."""
    labels = np.zeros((height, width), dtype=np.uint8)
    cy, cx = height // 2, width // 2
    # head: disk near the top
    yy, xx = np.mgrid[0:height, 0:width]
    labels[(yy - height // 6) ** 2 + (xx - cx) ** 2 <= (height // 10) ** 2] = 1
    # torso column is left unlabeled on purpose (background)
    arm_top, arm_bot = height // 3, height // 2
    labels[arm_top:arm_bot, cx - width // 3:cx - width // 8] = 2   # left upper
    labels[arm_top:arm_bot, cx + width // 8:cx + width // 3] = 3   # right upper
    leg_top, leg_bot = height * 3 // 5, height * 9 // 10
    labels[leg_top:leg_bot, cx - width // 6:cx - width // 24] = 4  # left lower
    labels[leg_top:leg_bot, cx + width // 24:cx + width // 6] = 5  # right lower
    return labels


def write_batch_inputs(root, count, height=96, width=96, seed_base=1000):
    """Write HQ pngs, label rasters, and the JSONL input manifest."""
    import json

    from blurforge import image_io

    hq_dir = image_io.ensure_dir(root / "hq")
    labels_dir = image_io.ensure_dir(root / "labels")
    raster = make_person_labels(height, width)
    entries = []
    for i in range(count):
        hq_path = hq_dir / f"{i:04d}.png"
        labels_path = labels_dir / f"{i:04d}.png"
        image_io.save_image(make_natural_image(height, width, seed_base + i),
                            hq_path)
        image_io.save_label_raster(raster, labels_path)
        entries.append({"hq_path": str(hq_path), "labels_path": str(labels_path)})
    manifest = root / "inputs.jsonl"
    manifest.write_text("\n".join(json.dumps(e) for e in entries) + "\n"
                        if entries else "")
    return manifest


@pytest.fixture
def natural_image():
    return make_natural_image()


@pytest.fixture
def person_labels():
    return PartLabelMap(labels=make_person_labels())
