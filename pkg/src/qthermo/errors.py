"""Exception types raised across the package."""


class QThermoError(Exception):
    pass


class NumericalError(QThermoError):
    """Failure of a numerical routine; carries the simulation time when known."""

    def __init__(self, message, time=None):
        super().__init__(message if time is None else f"{message} (t={time!r})")
        self.time = time


class NotHermitian(NumericalError, ValueError):
    pass


class NoConvergence(NumericalError):
    pass


class DomainError(NumericalError, ValueError):
    pass


class DimensionMismatch(QThermoError, ValueError):
    pass


class ZeroVector(QThermoError, ValueError):
    pass


class NonPositiveTemperature(QThermoError, ValueError):
    pass


class BadSplit(QThermoError, ValueError):
    pass


class InvalidState(QThermoError, ValueError):
    pass


class StepRejected(NumericalError):
    pass


class InvariantViolation(NumericalError):
    pass


class NonPositiveHotHeat(QThermoError, ValueError):
    pass


class BadDistribution(QThermoError, ValueError):
    pass


class ConfigError(QThermoError):
    """Invalid scenario configuration; ``field`` is a dotted path into the document."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
