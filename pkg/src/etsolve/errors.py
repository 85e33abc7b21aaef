"""Exception types shared across the package."""


class InvalidSpecError(ValueError):
    """A grid / filter / run specification violates its invariants."""


class ConfigError(ValueError):
    """Bad run configuration (unknown key, missing value, incompatible options)."""


class SingularityError(ValueError):
    """A multiplicative operator is non-finite at a quadrature node."""


class DimensionError(ValueError):
    """Vector or matrix dimensions do not match the assembly."""


class OutOfDomainError(ValueError):
    """A requested coordinate lies outside the simulated volume."""


class StiffnessError(RuntimeError):
    """The Krylov dimension hit its cap before the error criterion was met."""

    def __init__(self, message, k_reached=None, error_estimate=None):
        super().__init__(message)
        self.k_reached = k_reached
        self.error_estimate = error_estimate


class LocalizationError(RuntimeError):
    """Removed high-energy states leak to the edge of the filter window."""


class NumericalError(RuntimeError):
    """Non-finite values appeared in the propagated state."""


class CheckpointError(ValueError):
    """Checkpoint fingerprint does not match the current grid/configuration."""
