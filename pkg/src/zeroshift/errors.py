"""Exception types shared across the package."""


class ZeroShiftError(Exception):
    """Base class for all package errors."""


class ShapeError(ZeroShiftError):
    """Operand dimensions or ranks are incompatible."""


class DegenerateVectorError(ZeroShiftError):
    """A vector with zero norm was used where a direction is required."""


class FileFormatError(ZeroShiftError):
    """A file does not follow its declared binary or text layout."""


class FileSizeError(FileFormatError):
    """Declared element counts disagree with the actual payload size."""


class DataValidationError(ZeroShiftError):
    """Loaded values violate a data invariant (non-finite, empty, misaligned)."""


class GraphError(ZeroShiftError):
    """A relation graph violates its structural invariants."""


class ConfigError(ZeroShiftError):
    """A configuration key or value is invalid."""


class TrainingError(ZeroShiftError):
    """Training cannot proceed (empty split, non-finite gradient)."""
