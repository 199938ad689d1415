"""Exception hierarchy shared by all kklab modules."""


class KKError(Exception):
    """Base class for every error raised by kklab."""


class OutOfStateSpace(KKError, ValueError):
    """A state lies outside the admissible set ``u, v >= m`` (or r, xi <= 0)."""


class NonPositiveDerivative(KKError, ValueError):
    """A flux law has ``phi'(r) <= 0`` somewhere on the working interval."""


class QuadratureFailure(KKError, ArithmeticError):
    """Adaptive quadrature did not reach its absolute tolerance."""


class AdmissibilityViolation(KKError, ValueError):
    """A constructed wave fails the Lax inequalities or the fan ordering."""


class RootNotBracketed(KKError, ArithmeticError):
    """Rarefaction inversion could not bracket a root of lambda_2(r) = x/t."""


class NumericalFailure(KKError, ArithmeticError):
    """Base for failures that abort a time integration.

    ``time`` is the simulation time at which the failing step started,
    or ``None`` when the error was raised outside a run loop.
    """

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time

    def __str__(self):
        base = super().__str__()
        if self.time is None:
            return base
        return f"{base} (t = {self.time:.17g})"


class StabilityViolation(NumericalFailure):
    """A requested time step exceeds the stable step of the scheme."""


class StateSpaceExit(NumericalFailure):
    """A cell left the tolerated box around [m, M]."""


class InsufficientCadence(KKError, ValueError):
    """Trajectory snapshots are too sparse for space-time quadrature."""


class LengthMismatch(KKError, ValueError):
    """Two fields that must share a grid have different lengths."""


class ParseError(KKError, ValueError):
    """A configuration file is malformed."""


class ValidationError(KKError, ValueError):
    """A configuration value violates a constraint.

    ``key`` names the offending configuration key.
    """

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class IoError(KKError, OSError):
    """Reading or writing an output file failed."""
