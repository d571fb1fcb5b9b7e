"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Operator or state shape does not match its Hilbert space."""


class ConfigurationError(ValueError):
    """Physical parameters violate a structural requirement of a model."""


class StiffnessError(RuntimeError):
    """The adaptive integrator could not make progress (step-size underflow)."""


class AccuracyError(RuntimeError):
    """A conserved quantity drifted beyond its allowed bound during propagation."""
