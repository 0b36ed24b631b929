"""Deterministic, splittable random streams keyed by (root_seed, sample_index).

Every sample in a batch owns exactly one stream. Streams for distinct
indices are statistically independent, and the draw sequence of a stream
is a pure function of its key, so batch results never depend on worker
count or scheduling order.
"""

from __future__ import annotations

import numpy as np


class RngStream:
    """Single-owner random stream for one sample.

    Wraps a numpy Generator seeded from (root_seed, sample_index) via
    SeedSequence spawn keys. `draw_counter` counts draw calls, which is
    occasionally useful when debugging replay mismatches; it carries no
    semantics beyond that.
    """

    __slots__ = ("root_seed", "sample_index", "draw_counter", "_gen")

    def __init__(self, root_seed: int, sample_index: int):
        if not 0 <= root_seed < 2**64:
            raise ValueError(f"root_seed must be a u64, got {root_seed}")
        if sample_index < 0:
            raise ValueError(f"sample_index must be >= 0, got {sample_index}")
        self.root_seed = root_seed
        self.sample_index = sample_index
        self.draw_counter = 0
        seq = np.random.SeedSequence(entropy=root_seed, spawn_key=(sample_index,))
        self._gen = np.random.default_rng(seq)

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        self.draw_counter += 1
        return self._gen.uniform(low, high, size)

    def standard_normal(self, size=None):
        self.draw_counter += 1
        return self._gen.standard_normal(size)

    def integers(self, low: int, high: int, size=None):
        """Draw integers in [low, high) like numpy's Generator.integers."""
        self.draw_counter += 1
        return self._gen.integers(low, high, size)

    def choice(self, options, p=None):
        self.draw_counter += 1
        idx = self._gen.choice(len(options), p=p)
        return options[int(idx)]

    def poisson(self, lam):
        self.draw_counter += 1
        return self._gen.poisson(lam)

    def __repr__(self) -> str:
        return (f"RngStream(root_seed={self.root_seed}, "
                f"sample_index={self.sample_index}, draws={self.draw_counter})")


def derive_stream(root_seed: int, sample_index: int) -> RngStream:
    """Derive the independent stream that owns `sample_index`."""
    return RngStream(root_seed, sample_index)
