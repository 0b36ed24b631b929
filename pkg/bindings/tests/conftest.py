import json

import numpy as np

from blurforge import image_io


def make_test_image(height=96, width=96, seed=0):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width] / max(height, width)
    base = np.stack([0.5 + 0.4 * np.sin(2 * np.pi * (xx + 0.2 * yy)),
                     0.5 + 0.3 * np.cos(2 * np.pi * yy),
                     0.3 + 0.4 * xx], axis=-1)
    noise = rng.normal(0, 0.05, (height, width, 3))
    return np.clip(base + noise, 0.0, 1.0)


def make_test_labels(height=96, width=96):
    labels = np.zeros((height, width), dtype=np.uint8)
    cx = width // 2
    yy, xx = np.mgrid[0:height, 0:width]
    labels[(yy - height // 6) ** 2 + (xx - cx) ** 2 <= (height // 10) ** 2] = 1
    labels[height // 3:height // 2, cx - width // 3:cx - width // 8] = 2
    labels[height // 3:height // 2, cx + width // 8:cx + width // 3] = 3
    labels[height * 3 // 5:height * 9 // 10, cx - width // 6:cx - width // 24] = 4
    labels[height * 3 // 5:height * 9 // 10, cx + width // 24:cx + width // 6] = 5
    return labels


def write_inputs(root, count, height=96, width=96):
    hq_dir = image_io.ensure_dir(root / "hq")
    labels_dir = image_io.ensure_dir(root / "labels")
    raster = make_test_labels(height, width)
    entries = []
    for i in range(count):
        hq_path = hq_dir / f"{i:04d}.png"
        labels_path = labels_dir / f"{i:04d}.png"
        image_io.save_image(make_test_image(height, width, seed=500 + i), hq_path)
        image_io.save_label_raster(raster, labels_path)
        entries.append({"hq_path": str(hq_path),
                        "labels_path": str(labels_path)})
    manifest = root / "inputs.jsonl"
    manifest.write_text("\n".join(json.dumps(e) for e in entries) + "\n")
    return manifest


def write_config(root, text="root_seed = 21\noutput_size = 96\n"):
    path = root / "run.toml"
    path.write_text(text)
    return path
