"""Error taxonomy shared by the library modules and the CLI."""


class NcKondratievError(Exception):
    """Base class for every domain error raised by this package."""


class NotAPrefix(NcKondratievError):
    pass


class WeightOverflow(NcKondratievError, OverflowError):
    pass


class TruncationViolation(NcKondratievError):
    pass


class TermLimitExceeded(TruncationViolation):
    pass


class DomainError(NcKondratievError, ValueError):
    pass


class Divergent(NcKondratievError):
    pass


class NotContractive(NcKondratievError):
    pass


class RadiusViolation(NcKondratievError):
    pass


class NotInvertible(NcKondratievError):
    pass


class DimensionMismatch(NcKondratievError, ValueError):
    pass


class PreconditionFailed(NcKondratievError):
    pass


class PropertyViolation(NcKondratievError):
    """An inequality or identity that must hold was observed to fail."""
