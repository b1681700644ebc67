"""Exception types shared across the package."""


class MinactError(Exception):
    """Base class for all package-specific errors."""


class MetricDegenerateError(MinactError):
    """A diffusion metric (or a Gram matrix built from it) is not positive definite."""


class DegenerateConstraintsError(MinactError):
    """Constraint gradients are linearly dependent at the queried point."""


class TangentDomainError(MinactError):
    """A vector handed to the generalized inverse is not in the tangent space."""


class RetractionError(MinactError):
    """Newton correction back onto the manifold failed to converge."""


class InfeasiblePathError(MinactError):
    """A path image violates the manifold constraints beyond tolerance."""


class DegenerateParametrizationError(MinactError):
    """A curve tangent vanishes where the time change needs to divide by it."""


class AmbiguousGeodesicError(MinactError):
    """Two consecutive route waypoints are antipodal on a sphere factor."""


class MarginalStabilityError(MinactError):
    """An eigenvalue real part sits inside the classification dead band."""


class MultistartError(MinactError):
    """Every route of a multistart run failed."""


class ConfigError(MinactError):
    """A scenario configuration file is missing or inconsistent."""
