"""Run configuration: TOML parsing, defaults, and validation diagnostics.

`validate_config` never raises; it returns a list of diagnostics with
best-effort line anchors so a CLI can print actionable messages.
Unknown keys are warnings (forward compatibility); structural and range
violations are errors.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib as _toml  # Python >= 3.11
    _TOML_BINARY = True
except ModuleNotFoundError:
    import toml as _toml
    _TOML_BINARY = False

from .errors import ConfigError
from .generic import (
    BlurRange,
    GenericParams,
    JpegRange,
    NoiseRange,
    ResizeRange,
    StageSkips,
)
from .manifest import BRANCHES
from .parts import DEFAULT_LEGEND, PART_GROUPS

PROB_TOL = 1e-9


@dataclass(frozen=True)
class Diagnostic:
    severity: str          # "error" | "warning"
    key: str
    message: str
    line: int | None = None

    def __str__(self) -> str:
        anchor = f" (line {self.line})" if self.line else ""
        return f"{self.severity}: {self.key}{anchor}: {self.message}"


@dataclass(frozen=True)
class TrajectorySampling:
    """Ranges the pipeline draws per-sample trajectory params from."""

    num_steps: int = 256
    canvas: int = 64
    inertia: float = 0.7
    big_shake_prob: float = 0.2
    centripetal_gain: float = 0.7
    step_length_range: tuple[float, float] = (2.0, 16.0)
    sigma_factor: float = 0.3
    psf_size: int = 63
    exposure_fraction: float = 1.0


@dataclass(frozen=True)
class MorphSampling:
    erode_radii: tuple[int, ...] = (0, 1, 2)
    dilate_radius_range: tuple[int, int] = (2, 8)
    gaussian_sigma_range: tuple[float, float] = (1.0, 6.0)
    binarize_threshold: float = 0.5


@dataclass
class PipelineConfig:
    root_seed: int = 0
    branch_probs: dict[str, float] = field(
        default_factory=lambda: {"none": 0.2, "hmb": 0.4, "generic": 0.4})
    part_group_weights: dict[str, float] = field(
        default_factory=lambda: {g: 1.0 for g in PART_GROUPS})
    legend: dict[int, str] = field(default_factory=lambda: dict(DEFAULT_LEGEND))
    trajectory: TrajectorySampling = field(default_factory=TrajectorySampling)
    morph: MorphSampling = field(default_factory=MorphSampling)
    first_order: GenericParams = field(default_factory=GenericParams)
    second_order: GenericParams = field(default_factory=GenericParams)
    output_size: int = 512
    blend_mode: str = "circular"          # wraparound per the blend definition
    final_resize_filter: str = "bicubic"
    lq_format: str = "png"                # "jpeg" re-emits the final stage bytes
    output_dir: str | None = None

    def to_dict(self) -> dict:
        from dataclasses import asdict
        echo = asdict(self)
        echo["legend"] = {str(k): v for k, v in self.legend.items()}
        return echo


def load_config(path) -> PipelineConfig:
    """Parse and validate; raises ConfigError on any error diagnostic."""
    cfg, diagnostics = build_config(path)
    errors = [d for d in diagnostics if d.severity == "error"]
    if errors or cfg is None:
        lines = "\n".join(str(d) for d in errors) or "unparseable config"
        raise ConfigError(f"invalid config {path}:\n{lines}")
    return cfg


def validate_config(path) -> list[Diagnostic]:
    """Structural and range validation; returns diagnostics, never raises."""
    _, diagnostics = build_config(path)
    return diagnostics


def build_config(path) -> tuple[PipelineConfig | None, list[Diagnostic]]:
    path = Path(path)
    if not path.is_file():
        return None, [Diagnostic("error", str(path), "config file not found")]
    text = path.read_text(encoding="utf-8")
    try:
        if _TOML_BINARY:
            data = _toml.loads(text)
        else:
            data = _toml.loads(text)
    except Exception as exc:
        line = getattr(exc, "lineno", None)
        return None, [Diagnostic("error", str(path), f"TOML parse error: {exc}",
                                 line=line)]
    return config_from_dict(data, source_text=text)


def config_from_dict(data: dict, source_text: str = ""
                     ) -> tuple[PipelineConfig | None, list[Diagnostic]]:
    diags: list[Diagnostic] = []
    anchor = _LineAnchor(source_text)

    def err(key, msg):
        diags.append(Diagnostic("error", key, msg, line=anchor.find(key)))

    def warn(key, msg):
        diags.append(Diagnostic("warning", key, msg, line=anchor.find(key)))

    known_top = {"root_seed", "branch_probs", "part_group_weights", "legend",
                 "trajectory", "morph", "first_order", "second_order",
                 "output_size", "blend_mode", "final_resize_filter",
                 "lq_format", "output_dir"}
    for key in set(data) - known_top:
        warn(key, "unknown key; ignored")

    cfg = PipelineConfig()

    root_seed = data.get("root_seed", cfg.root_seed)
    if not isinstance(root_seed, int) or not 0 <= root_seed < 2**64:
        err("root_seed", f"must be an unsigned 64-bit integer, got {root_seed!r}")
        root_seed = 0

    branch_probs = dict(cfg.branch_probs)
    raw = data.get("branch_probs", {})
    for key in set(raw) - set(BRANCHES):
        err(f"branch_probs.{key}", f"unknown branch; expected one of {BRANCHES}")
    for name in BRANCHES:
        if name in raw:
            branch_probs[name] = float(raw[name])
    for name, p in branch_probs.items():
        if not 0.0 <= p <= 1.0:
            err(f"branch_probs.{name}", f"probability {p} outside [0, 1]")
    total = sum(branch_probs.values())
    if abs(total - 1.0) > PROB_TOL:
        err("branch_probs", f"probabilities sum to {total}, expected 1")

    weights = dict(cfg.part_group_weights)
    raw = data.get("part_group_weights", {})
    for key in set(raw) - set(PART_GROUPS):
        err(f"part_group_weights.{key}",
            f"unknown part group; expected one of {PART_GROUPS}")
    for name in PART_GROUPS:
        if name in raw:
            weights[name] = float(raw[name])
    if any(w < 0 for w in weights.values()):
        err("part_group_weights", "weights must be >= 0")
    elif sum(weights.values()) <= 0:
        err("part_group_weights", "at least one group weight must be positive")

    legend = dict(cfg.legend)
    if "legend" in data:
        legend = {}
        for code_str, name in data["legend"].items():
            try:
                code = int(code_str)
            except ValueError:
                err(f"legend.{code_str}", "label code must be an integer")
                continue
            if code == 0:
                err("legend.0", "code 0 is reserved for background")
            elif name not in PART_GROUPS:
                err(f"legend.{code_str}",
                    f"unknown group {name!r}; expected one of {PART_GROUPS}")
            else:
                legend[code] = name
        regional = set(legend.values())
        missing = set(PART_GROUPS[:-1]) - regional
        if missing:
            warn("legend", f"groups with no label codes: {sorted(missing)}")

    trajectory = _section(data, "trajectory", TrajectorySampling, err, warn,
                          tuple_keys={"step_length_range"})
    if trajectory.psf_size % 2 == 0 or trajectory.psf_size < 3:
        err("trajectory.psf_size", "must be odd and >= 3")
    if not 0 < trajectory.exposure_fraction <= 1:
        err("trajectory.exposure_fraction", "must be in (0, 1]")
    if trajectory.step_length_range[0] <= 0 or \
            trajectory.step_length_range[0] > trajectory.step_length_range[1]:
        err("trajectory.step_length_range", "must be 0 < lo <= hi")

    morph = _section(data, "morph", MorphSampling, err, warn,
                     tuple_keys={"erode_radii", "dilate_radius_range",
                                 "gaussian_sigma_range"})
    if not 0 < morph.binarize_threshold < 1:
        err("morph.binarize_threshold", "must be in (0, 1)")
    if any(r < 0 for r in morph.erode_radii):
        err("morph.erode_radii", "radii must be >= 0")
    if morph.dilate_radius_range[0] < 0 or \
            morph.dilate_radius_range[0] > morph.dilate_radius_range[1]:
        err("morph.dilate_radius_range", "must be 0 <= lo <= hi")

    first_order = _generic_section(data, "first_order", err, warn)
    second_order = _generic_section(data, "second_order", err, warn)

    output_size = data.get("output_size", cfg.output_size)
    if not isinstance(output_size, int) or output_size < 16:
        err("output_size", f"must be an integer >= 16, got {output_size!r}")
        output_size = cfg.output_size

    blend_mode = data.get("blend_mode", cfg.blend_mode)
    if blend_mode not in ("circular", "reflect"):
        err("blend_mode", f"must be 'circular' or 'reflect', got {blend_mode!r}")
    final_filter = data.get("final_resize_filter", cfg.final_resize_filter)
    if final_filter not in ("area", "bilinear", "bicubic", "nearest"):
        err("final_resize_filter", f"unknown filter {final_filter!r}")
    lq_format = data.get("lq_format", cfg.lq_format)
    if lq_format not in ("png", "jpeg"):
        err("lq_format", f"must be 'png' or 'jpeg', got {lq_format!r}")

    output_dir = data.get("output_dir")
    if output_dir is not None:
        probe = Path(output_dir)
        while not probe.exists() and probe.parent != probe:
            probe = probe.parent
        if not probe.is_dir() or not os.access(probe, os.W_OK):
            err("output_dir", f"not a writable location: {output_dir}")

    config = PipelineConfig(
        root_seed=root_seed,
        branch_probs=branch_probs,
        part_group_weights=weights,
        legend=legend,
        trajectory=trajectory,
        morph=morph,
        first_order=first_order,
        second_order=second_order,
        output_size=output_size,
        blend_mode=blend_mode,
        final_resize_filter=final_filter,
        lq_format=lq_format,
        output_dir=output_dir,
    )
    return config, diags


def _section(data, name, cls, err, warn, tuple_keys=frozenset()):
    from dataclasses import fields as dc_fields
    defaults = cls()
    raw = data.get(name, {})
    known = {f.name for f in dc_fields(cls)}
    for key in set(raw) - known:
        warn(f"{name}.{key}", "unknown key; ignored")
    kwargs = {}
    for f in dc_fields(cls):
        if f.name not in raw:
            continue
        value = raw[f.name]
        if f.name in tuple_keys:
            value = tuple(value)
        kwargs[f.name] = value
    try:
        return cls(**kwargs) if kwargs else defaults
    except (TypeError, ValueError) as exc:
        err(name, f"invalid section: {exc}")
        return defaults


def _generic_section(data, name, err, warn) -> GenericParams:
    raw = data.get(name, {})
    known = {"blur", "resize", "noise", "jpeg", "skips"}
    for key in set(raw) - known:
        warn(f"{name}.{key}", "unknown key; ignored")
    parts = {}
    for sub, cls, tuples in (
            ("blur", BlurRange, {"kernel_size", "sigma"}),
            ("resize", ResizeRange, {"scale", "filters"}),
            ("noise", NoiseRange, {"gaussian_sigma", "poisson_scale"}),
            ("jpeg", JpegRange, {"quality"}),
            ("skips", StageSkips, frozenset())):
        sub_raw = raw.get(sub, {})
        from dataclasses import fields as dc_fields
        known_sub = {f.name for f in dc_fields(cls)}
        for key in set(sub_raw) - known_sub:
            warn(f"{name}.{sub}.{key}", "unknown key; ignored")
        kwargs = {}
        for f in dc_fields(cls):
            if f.name in sub_raw:
                value = sub_raw[f.name]
                if f.name in tuples:
                    value = tuple(value)
                kwargs[f.name] = value
        try:
            parts[sub] = cls(**kwargs) if kwargs else cls()
        except (TypeError, ValueError) as exc:
            err(f"{name}.{sub}", f"invalid section: {exc}")
            parts[sub] = cls()
    return GenericParams(**parts)


class _LineAnchor:
    """Best-effort line lookup for a dotted key in the raw TOML text."""

    def __init__(self, text: str):
        self.lines = text.splitlines() if text else []

    def find(self, dotted_key: str) -> int | None:
        leaf = dotted_key.rsplit(".", 1)[-1]
        for idx, line in enumerate(self.lines, start=1):
            stripped = line.split("#", 1)[0]
            if stripped.strip().startswith(leaf) or f"[{dotted_key}]" in stripped:
                return idx
        return None
