"""Exception hierarchy shared across the package."""


class SGCError(Exception):
    """Base class for all errors raised by sgc_chi."""


class InvalidParameters(SGCError, ValueError):
    """Parameters violate the physical constraints of the model."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DomainError(SGCError, ValueError):
    """An argument lies outside the domain of a function."""


class SingularityError(SGCError, ArithmeticError):
    """A closed-form expression has a vanishing denominator."""


class NonUniqueSteadyState(SGCError, ArithmeticError):
    """The constrained steady-state system is rank deficient."""

    def __init__(self, message, rcond=None):
        self.rcond = rcond
        super().__init__(message)


class IntegrationError(SGCError, RuntimeError):
    """Time integration failed; carries the last accepted state."""

    def __init__(self, message, last_time=None, last_state=None):
        self.last_time = last_time
        self.last_state = last_state
        super().__init__(message)


class ExtractionUnreliable(SGCError, ArithmeticError):
    """Polynomial order extraction did not fit the data cleanly."""


class ConfigError(SGCError, ValueError):
    """A sweep configuration is malformed."""
