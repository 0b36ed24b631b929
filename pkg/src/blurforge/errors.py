"""Exception hierarchy shared by all blurforge modules."""


class BlurforgeError(Exception):
    """Base class for every error raised by this package."""


class NotFoundError(BlurforgeError):
    """A referenced file does not exist."""


class DecodeError(BlurforgeError):
    """A raster file exists but cannot be decoded as expected."""


class UnsupportedBitDepthError(DecodeError):
    """Raster bit depth is neither 8 nor 16 bits per channel."""


class IoError(BlurforgeError):
    """Writing an output file failed."""


class EncodeError(BlurforgeError):
    """JPEG encoding failed."""


class InvalidParamsError(BlurforgeError, ValueError):
    """Parameter object violates its documented constraints."""


class EmptyTrajectoryError(BlurforgeError):
    """Trajectory has no points to rasterize."""


class ShapeMismatchError(BlurforgeError, ValueError):
    """Two arrays that must share a shape do not."""


class KernelTooLargeError(BlurforgeError):
    """Convolution kernel side exceeds the image's smaller dimension."""


class DegenerateOutputError(BlurforgeError):
    """Resize target has a zero dimension."""


class UnknownGroupError(BlurforgeError, KeyError):
    """Requested part group is not covered by the label legend."""


class EmptyGroupMaskError(BlurforgeError):
    """Selected part group covers zero pixels, or morphology erased it."""


class IndexOutOfRangeError(BlurforgeError, IndexError):
    """Timestep lies outside the noise schedule."""


class InvalidTimestepOrderError(BlurforgeError):
    """Sampling step targets a noisier timestep than the current one."""


class NegativeRadicandError(BlurforgeError):
    """Direction-term radicand 1 - abar_prev - sigma^2 is negative."""


class NegativeTermError(BlurforgeError, ValueError):
    """Loss aggregation received a negative component."""


class ZeroOriginalError(BlurforgeError, ZeroDivisionError):
    """Detection ratio is undefined when the original count is zero."""


class ParseError(BlurforgeError):
    """A manifest line is not valid JSON.

    Attributes:
        line: 1-based line number of the offending record.
    """

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ConfigError(BlurforgeError):
    """Configuration file failed validation hard enough to stop a run."""
