"""Exception hierarchy shared across the library."""


class ConvexGaussError(Exception):
    """Base class for all library-specific failures."""


class ParameterError(ConvexGaussError, ValueError):
    """A numerical parameter is outside its usable range."""


class DomainError(ConvexGaussError, ValueError):
    """An input point or value violates an operation's domain."""


class OracleIntegrityError(ConvexGaussError):
    """A membership oracle contradicted its certified structure
    (interior ball, outer radius, or interval-section property)."""


class BodySpecError(ConvexGaussError, ValueError):
    """A body specification failed validation; message names the offending field."""


class MarginError(ConvexGaussError):
    """A finite-difference stencil left the admissible domain."""


class CaseError(ConvexGaussError):
    """The requested graph is infinite for this body/direction."""


class DirectionError(ConvexGaussError):
    """The chosen direction leaves too much boundary vertical."""


class DegenerateDirectionError(DirectionError):
    """Every candidate direction is vertical-dominated."""


class MassError(ConvexGaussError):
    """The body carries too little Gaussian mass for rejection sampling."""


class DegeneracyError(ConvexGaussError):
    """A denominator that is provably positive almost everywhere vanished
    numerically at the evaluation point."""


class UnsupportedOrderError(ConvexGaussError, ValueError):
    """Requested subspace dimension exceeds the polar-parameterization limit."""
