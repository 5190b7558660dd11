"""Typed rejection errors.

Degenerate inputs are never silently coerced into empty geometry; every
drop rule surfaces as one of these exceptions so callers (and tests) can
observe exactly why an instance was discarded.
"""


class ContourLedgerError(Exception):
    """Base class for all package errors."""


class DegenerateRing(ContourLedgerError):
    """Ring has fewer than three non-collinear vertices or zero area."""


class EmptyMask(ContourLedgerError):
    """Binary mask has no foreground pixels."""


class MalformedRle(ContourLedgerError):
    """Run lengths do not sum to the encoded region size."""


class InsufficientSamples(ContourLedgerError):
    """Too few boundary samples for the requested harmonic order."""


class OrderOutOfRange(ContourLedgerError):
    """Requested harmonic order outside [1, n_f]."""


class OrderMismatch(ContourLedgerError):
    """Two descriptors do not share the same harmonic order."""


class SpaceMismatch(ContourLedgerError):
    """Descriptor is not in the coordinate space the operation expects."""


class PayloadSizeMismatch(ContourLedgerError):
    """Serialized payload length is not a valid descriptor size."""


class NonDivisible(ContourLedgerError):
    """Input size is not divisible by the requested grid stride."""


class OutOfGrid(ContourLedgerError):
    """Grid cell index lies outside the level's grid."""


class EmptyReference(ContourLedgerError):
    """Reference descriptor set is empty."""


class LengthMismatch(ContourLedgerError):
    """Paired vectors have different lengths."""


class ShapeMismatch(ContourLedgerError):
    """Batched arrays disagree in shape or harmonic order."""


class StoreFailure(ContourLedgerError):
    """Record store could not be opened or written."""


class SchemaError(ContourLedgerError):
    """A structured input record violates the documented schema."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
