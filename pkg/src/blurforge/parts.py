"""Body-part label rasters and their grouping into blur-target regions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParamsError, UnknownGroupError

# The six selectable regions. `whole_body` is implicit: it is the union
# of every nonzero label, so a legend never needs to map codes to it
# (though it may, e.g. for torso codes that only blur in whole-body mode).
PART_GROUPS = (
    "head",
    "left_upper_limb",
    "right_upper_limb",
    "left_lower_limb",
    "right_lower_limb",
    "whole_body",
)

WHOLE_BODY = "whole_body"

DEFAULT_LEGEND = {
    1: "head",
    2: "left_upper_limb",
    3: "right_upper_limb",
    4: "left_lower_limb",
    5: "right_lower_limb",
}


@dataclass(frozen=True)
class PartLabelMap:
    """Per-pixel part codes plus the legend mapping codes to group names.

    Code 0 is reserved for background and must not appear in the legend.
    """

    labels: np.ndarray
    legend: dict[int, str] = field(default_factory=lambda: dict(DEFAULT_LEGEND))

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise InvalidParamsError(
                f"label raster must be 2-D, got shape {labels.shape}")
        object.__setattr__(self, "labels", labels.astype(np.uint8))
        if 0 in self.legend:
            raise InvalidParamsError("code 0 is reserved for background")
        bad = {name for name in self.legend.values() if name not in PART_GROUPS}
        if bad:
            raise InvalidParamsError(f"legend names unknown groups: {sorted(bad)}")
        present = set(np.unique(self.labels)) - {0}
        missing = present - set(self.legend)
        if missing:
            raise InvalidParamsError(
                f"label codes without a legend entry: {sorted(missing)}")

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    def group_indicator(self, group: str) -> np.ndarray:
        """Binary float map of the pixels belonging to `group`."""
        if group not in PART_GROUPS:
            raise UnknownGroupError(group)
        if group == WHOLE_BODY:
            return (self.labels > 0).astype(np.float64)
        codes = [c for c, name in self.legend.items() if name == group]
        return np.isin(self.labels, codes).astype(np.float64)

    def group_pixel_count(self, group: str) -> int:
        return int(self.group_indicator(group).sum())
