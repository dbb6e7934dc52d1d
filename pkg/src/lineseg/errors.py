"""Exception types shared across the toolkit."""


class LinesegError(Exception):
    """Base class for toolkit errors."""


class RasterFormatError(LinesegError):
    """A PNG file is unreadable or not in the expected format."""


class LabelRangeError(LinesegError, ValueError):
    """A label id exceeds the 16-bit range of the label raster format."""


class DegenerateInputError(LinesegError, ValueError):
    """Too few distinct points (or no admissible conic) for an ellipse fit."""


class GenerationError(LinesegError, ValueError):
    """A synthetic page specification cannot be realized."""


class PredictorContractError(LinesegError):
    """A patch predictor violated the window protocol."""
