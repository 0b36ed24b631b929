"""Provenance records and the JSONL manifest they are persisted in.

The manifest's first line is a header object (run metadata, config echo,
timestamp); every following line is one SampleRecord. Replaying a
record's (root_seed, sample_index) against the same config and inputs
reproduces the LQ output bit-identically.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator

from .errors import ParseError

MANIFEST_VERSION = 1

BRANCH_NONE = "none"
BRANCH_HMB = "hmb"
BRANCH_GENERIC = "generic"
BRANCHES = (BRANCH_NONE, BRANCH_HMB, BRANCH_GENERIC)


@dataclass
class SampleRecord:
    sample_index: int
    root_seed: int
    first_order_branch: str
    selected_part_group: str | None = None
    hmb_params: dict | None = None          # morphology, trajectory, psf draws
    first_order_generic: dict | None = None
    second_order_generic: dict = field(default_factory=dict)
    hq_path: str = ""
    lq_path: str = ""
    mask_path: str = ""
    hmb_coverage: float = 0.0               # fraction of mask pixels set
    fallback_from_hmb: bool = False         # hmb drawn but group mask unusable

    def to_json(self) -> str:
        payload = {"kind": "sample", **asdict(self)}
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_dict(cls, payload: dict) -> "SampleRecord":
        payload = {k: v for k, v in payload.items() if k != "kind"}
        return cls(**payload)


def make_header(root_seed: int, config_echo: dict) -> dict:
    return {
        "kind": "header",
        "version": MANIFEST_VERSION,
        "root_seed": root_seed,
        # Degradations operate on decoded raster values as-is; no
        # linearization or color management is applied.
        "intensity_space": "decoded-raster",
        "config": config_echo,
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }


def write_manifest(path, header: dict, records: list[SampleRecord]) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for record in sorted(records, key=lambda r: r.sample_index):
            fh.write(record.to_json() + "\n")


def iter_manifest(path) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, payload) for every line, header included."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(exc), line=lineno) from None


def read_records(path) -> list[SampleRecord]:
    records = []
    for _, payload in iter_manifest(path):
        if payload.get("kind") == "sample":
            records.append(SampleRecord.from_dict(payload))
    return records
