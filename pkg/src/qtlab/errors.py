"""Exception hierarchy.

ValidationError and its subclasses mark numerical-precondition failures
(CLI exit code 3); ConfigError marks bad run configuration (exit code 2).
"""


class QtlabError(Exception):
    """Base class for all qtlab errors."""


class ValidationError(QtlabError):
    """A numerical precondition on the inputs does not hold."""


class GridError(ValidationError):
    """Invalid grid construction (size, spacing)."""


class ResolutionError(ValidationError):
    """A feature is too narrow for the grid to resolve."""


class BoundaryLeakError(ValidationError):
    """Wavefunction amplitude is not negligible at the domain edge."""


class StabilityError(ValidationError):
    """Time step violates the stepping stability heuristics."""


class CausticError(ValidationError):
    """Two-point kernel degenerates (sin(omega*t) = 0 or t = 0)."""


class MaskError(ValidationError):
    """Density is below the validity floor where a value is required."""


class DegreeOverflowError(ValidationError):
    """Polynomial degree exceeds the supported star-product range."""


class TruncationError(ValidationError):
    """Operator-basis truncation tail exceeds the tolerance."""


class ConsistencyError(QtlabError):
    """Two independent computation routes disagree beyond tolerance."""


class ConfigError(QtlabError):
    """Malformed or incomplete run configuration."""
