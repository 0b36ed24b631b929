"""Command-line interface.

Exit codes: 0 success, 1 partial failure (some samples failed), 2
configuration error.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click

from . import __version__, evaluate, image_io
from .config import load_config, validate_config
from .errors import BlurforgeError, ConfigError
from .manifest import BRANCH_HMB
from .parts import PartLabelMap
from .pipeline import degrade_sample, run_batch


@click.group()
@click.version_option(version=__version__)
def main():
    """Synthetic degradation engine for paired LQ/HQ human-image data."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=False), help="TOML run configuration.")
@click.option("--input", "input_manifest", required=True,
              type=click.Path(exists=True),
              help="JSONL listing of {hq_path, labels_path} pairs.")
@click.option("--out", "out_dir", default=None, type=click.Path(),
              help="Output directory; falls back to the config output_dir.")
@click.option("--jobs", default=1, show_default=True,
              help="Parallel worker processes.")
@click.option("--limit", default=None, type=int,
              help="Process only the first K manifest entries.")
def generate(config_path, input_manifest, out_dir, jobs, limit):
    """Degrade every input pair and write LQ, masks, and a manifest."""
    cfg = _load_config_or_exit(config_path)
    out_dir = out_dir or cfg.output_dir
    if out_dir is None:
        click.echo("error: no output directory (pass --out or set "
                   "output_dir in the config)", err=True)
        sys.exit(2)
    try:
        summary = run_batch(input_manifest, cfg, out_dir, jobs=jobs, limit=limit)
    except BlurforgeError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(json.dumps(summary.to_dict(), indent=2))
    sys.exit(1 if summary.failures else 0)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--hq", "hq_path", required=True, type=click.Path(exists=True))
@click.option("--labels", "labels_path", required=True,
              type=click.Path(exists=True))
@click.option("--seed", default=None, type=int,
              help="Override the config root seed.")
@click.option("--index", default=0, show_default=True,
              help="Sample index within the run.")
@click.option("--branch", default=None,
              type=click.Choice(["none", "hmb", "generic"]),
              help="Force the first-order branch instead of drawing it.")
@click.option("--out", "out_dir", required=True, type=click.Path())
def preview(config_path, hq_path, labels_path, seed, index, branch, out_dir):
    """Degrade one image, dumping every intermediate for inspection."""
    cfg = _load_config_or_exit(config_path)
    if seed is not None:
        cfg = dataclasses.replace(cfg, root_seed=seed)
    out = image_io.ensure_dir(out_dir)
    try:
        hq = image_io.load_image(hq_path)
        raster = image_io.load_label_raster(labels_path)
        labels = PartLabelMap(labels=raster, legend=cfg.legend)
        result = degrade_sample(hq, labels, cfg, index, force_branch=branch,
                                keep_intermediates=True)
    except BlurforgeError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)

    image_io.save_image(result.lq, out / "lq.png")
    image_io.save_mask(result.mask, out / "mask.png")
    inter = result.intermediates or {}
    if result.record.first_order_branch == BRANCH_HMB and inter:
        image_io.save_gray16(inter["psf"], out / "psf.png")
        image_io.save_gray16(inter["weight_map"], out / "weight_map.png")
        image_io.save_image(inter["blurred"], out / "blurred.png")
        image_io.save_image(inter["blended"], out / "hmb.png")
    record_payload = json.loads(result.record.to_json())
    (out / "record.json").write_text(json.dumps(record_payload, indent=2))
    click.echo(f"branch={result.record.first_order_branch} "
               f"coverage={result.record.hmb_coverage:.4f} -> {out}")


@main.command("validate-config")
@click.argument("config_path", type=click.Path())
def validate_config_cmd(config_path):
    """Check a config file; unknown keys warn, violations error."""
    diagnostics = validate_config(config_path)
    for diag in diagnostics:
        click.echo(str(diag))
    errors = sum(d.severity == "error" for d in diagnostics)
    if errors:
        click.echo(f"{errors} error(s)", err=True)
        sys.exit(2)
    click.echo("config ok" if not diagnostics else
               f"config ok with {len(diagnostics)} warning(s)")


@main.command()
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True))
def stats(manifest_path):
    """Summarize a run manifest as JSON on stdout."""
    try:
        report = evaluate.manifest_stats(manifest_path)
    except BlurforgeError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(json.dumps(report, indent=2))


@main.command()
@click.option("--original", "original_path", required=True,
              type=click.Path(exists=True),
              help="JSONL detection counts for the original set.")
@click.option("--restored", "restored_path", required=True,
              type=click.Path(exists=True),
              help="JSONL detection counts for the restored set.")
def hmbr(original_path, restored_path):
    """Blur-instance ratio between restored and original detections."""
    try:
        original = evaluate.DetectionCounts.load(original_path)
        restored = evaluate.DetectionCounts.load(restored_path)
        report = evaluate.detection_ratio(original, restored)
    except (BlurforgeError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(json.dumps(report, indent=2))


def _load_config_or_exit(config_path):
    try:
        return load_config(config_path)
    except ConfigError as exc:
        click.echo(str(exc), err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
