"""Exception hierarchy shared by every module."""


class MacrophaseError(Exception):
    """Base class for all errors raised by the package."""


class ConfigurationError(MacrophaseError, ValueError):
    """Invalid parameters: bad grid, schema violation, unnormalized state."""


class GeometryError(MacrophaseError):
    """A wave packet leaks past the edge of the periodic grid."""


class NumericalInstabilityError(MacrophaseError):
    """Propagation lost unitarity or failed to converge."""


class UndefinedPhaseError(MacrophaseError, ValueError):
    """A relative phase was requested where an amplitude vanishes."""


class DegenerateVectorError(MacrophaseError, ValueError):
    """A vector with (numerically) zero norm where a ray is required."""
