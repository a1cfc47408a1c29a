"""Exception types shared across the package.

Each class corresponds to one failure mode of the model pipeline so callers
(and the command line front end) can map errors to precise exit conditions.
"""

from __future__ import annotations


class ModelError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ModelError):
    """Malformed user input: scenario files, edge lists, CLI values."""


class ConstraintViolation(ModelError):
    """A tag probability would leave [0, 1): alpha * (w + epsilon) >= 1."""


class RegimeViolation(ModelError):
    """Parameter ordering checks failed; carries the list of failures."""

    def __init__(self, failures: list[str]):
        self.failures = list(failures)
        super().__init__("; ".join(self.failures))


class UnsupportedConfiguration(ModelError):
    """Requested operation is outside the supported model regime."""


class CurveUndefinedError(ModelError):
    """The equal-performance constraint curve has no solution here."""


class DegenerateSensitivityError(ModelError):
    """Implicit differentiation denominator vanished at the fixed point."""


class InfeasibleError(ModelError):
    """No warning policy can meet the requested performance target."""

    def __init__(self, message: str, psi2_low: float, psi2_high: float):
        self.psi2_low = psi2_low
        self.psi2_high = psi2_high
        super().__init__(message)


class InvariantViolation(ModelError):
    """A runtime invariant of a simulation or optimizer run failed."""
