"""Array-level bindings over the blurforge degradation engine.

Training loops consume samples in-process as plain numpy arrays. The
views carry exactly the values the engine's CLI persists (8-bit
quantized), so a sample obtained here is bit-identical to the file a
batch run writes for the same (root_seed, sample_index).
"""

import blurforge as _engine

__version__ = _engine.__version__
engine_version = _engine.__version__

from .binding import BindingError, SampleBatchView, degrade, sample_iter

__all__ = [
    "BindingError",
    "SampleBatchView",
    "__version__",
    "degrade",
    "engine_version",
    "sample_iter",
]
