"""Exception hierarchy shared by all kerrjc modules."""

from __future__ import annotations


class KerrJCError(Exception):
    """Base class for every error raised by the library."""


class InvalidDimensionError(KerrJCError, ValueError):
    pass


class LayoutError(KerrJCError, ValueError):
    pass


class ParameterError(KerrJCError, ValueError):
    pass


class NoUniqueSteadyStateError(KerrJCError):
    pass


class ConvergenceError(KerrJCError):
    """Solver output failed a tolerance check; ``residual`` holds the offending value."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class IntegrationError(KerrJCError):
    pass


class UndefinedCorrelationError(KerrJCError, ValueError):
    pass


class UnsupportedRegimeError(KerrJCError, ValueError):
    pass


class SingularSystemError(KerrJCError):
    pass


class ClosedFormSingularityError(SingularSystemError):
    pass


class SweepError(KerrJCError):
    pass
