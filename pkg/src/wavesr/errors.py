"""Exception types shared across the package."""


class WavesrError(Exception):
    """Base class for all package errors."""


class ShapeError(WavesrError, ValueError):
    """Tensor dimensions incompatible with the requested operation."""


class ParameterError(WavesrError, ValueError):
    """Invalid operation parameter (negative stride, bad kernel size, ...)."""


class ConfigError(WavesrError, ValueError):
    """Invalid or inconsistent configuration."""


class ContractError(WavesrError, RuntimeError):
    """An API precondition was violated (e.g. backward on a non-scalar)."""


class DataFormatError(WavesrError, ValueError):
    """Malformed on-disk data; carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class NumericError(WavesrError, RuntimeError):
    """Non-finite values where finite ones are required (NaN loss, ...)."""
