"""Exception types raised by the simulator."""


class QdcError(Exception):
    """Base class for all library errors."""


class DimensionError(QdcError):
    """Subsystem indices, ket digits, or operator shapes do not fit the layout."""


class DegenerateStateError(QdcError):
    """A construction produced the zero vector where a state was required."""


class ArgumentError(QdcError, ValueError):
    """A protocol-level argument is outside its allowed range."""


class MeasurementSetError(QdcError):
    """Projector set is not orthogonal and complete on its target subspace."""


class CapacityLimitError(QdcError):
    """Requested system exceeds the amplitude cap or a configured time budget."""


class ProtocolViolationError(QdcError):
    """A measurement outcome occurred that an honest protocol run cannot produce."""


class FormatError(QdcError):
    """Serialized transcript has an unknown schema or is structurally invalid."""
