"""Exception types shared across the package."""


class RecurrenceLabError(Exception):
    """Base class for all package errors."""


class DomainError(RecurrenceLabError, ValueError):
    """A point lies outside the half-open unit cube [0,1)^d."""


class KindError(RecurrenceLabError, TypeError):
    """An operation was called on an unsupported map/density kind."""


class OverflowGuardError(RecurrenceLabError, ValueError):
    """Cylinder enumeration would overflow floats or exhaust memory."""


class ParameterRangeError(RecurrenceLabError, ValueError):
    """A numeric parameter violates its documented range."""


class InfeasibleError(RecurrenceLabError, ValueError):
    """A measure-scaling target cannot be reached inside the cube."""


class ConvergenceError(RecurrenceLabError, RuntimeError):
    """An iterative solver did not converge; carries the final residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class GridError(RecurrenceLabError, ValueError):
    """A search grid does not bracket the sought transition."""


class ConstructionError(RecurrenceLabError, RuntimeError):
    """A subsystem construction hit its guard before reaching its target."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(RecurrenceLabError, ValueError):
    """Invalid experiment configuration; carries the violation list."""

    def __init__(self, violations):
        super().__init__("; ".join(violations) if violations else "invalid config")
        self.violations = list(violations)
