"""Exception types shared across the toolkit."""


class PerceptError(Exception):
    """Base class for every error raised by this package."""


class ShapeMismatch(PerceptError):
    pass


class NonFiniteValue(PerceptError):
    """A NaN or Inf appeared inside the engine; computation is aborted."""


class UnknownLayerName(PerceptError):
    def __init__(self, name, available):
        self.name = name
        self.available = list(available)
        super().__init__(
            f"unknown layer {name!r}; available layers: {', '.join(self.available)}"
        )


class InvalidTarget(PerceptError):
    pass


class NonSpatialLayer(PerceptError):
    pass


class FilterIndexOutOfRange(PerceptError):
    pass


class ImageShapeMismatch(PerceptError):
    pass


class ZeroTargetActivation(PerceptError):
    pass


class FormatError(PerceptError):
    """Malformed binary file. Carries the byte offset of the problem."""

    def __init__(self, message, offset):
        self.offset = offset
        super().__init__(f"{message} (byte offset {offset})")


class UnsupportedVersion(PerceptError):
    pass


class UnsupportedMaxVal(PerceptError):
    pass


class SizeMismatch(PerceptError):
    pass


class ParseError(PerceptError):
    """Malformed CSV content. Carries 1-based data row and 0-based column."""

    def __init__(self, message, row, column):
        self.row = row
        self.column = column
        super().__init__(f"{message} (row {row}, column {column})")


class InconsistentArity(PerceptError):
    pass


class EmptyDataset(PerceptError):
    pass


class InvalidGrid(PerceptError):
    pass


class DegenerateDesign(PerceptError):
    pass


class DesignTooLarge(PerceptError):
    pass


class PredictorFailure(PerceptError):
    pass


class TooManyFeaturesForExact(PerceptError):
    pass


class SingularSystem(PerceptError):
    pass
