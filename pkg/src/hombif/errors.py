"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures to the documented exit status without a lookup table.
"""


class HombifError(Exception):
    exit_code = 1


class InvalidInputError(HombifError, ValueError):
    exit_code = 5


class NotHyperbolicError(HombifError):
    """An eigenvalue sits within the margin tolerance of the unit circle."""

    exit_code = 2

    def __init__(self, modulus, message=None):
        self.modulus = float(modulus)
        super().__init__(message or f"eigenvalue with |z| = {self.modulus:.12g} is too close to the unit circle")


class SlowDecayError(HombifError):
    exit_code = 2

    def __init__(self, tail, tol):
        self.tail = float(tail)
        self.tol = float(tol)
        super().__init__(f"coefficient tail {self.tail:.3e} exceeds decay tolerance {self.tol:.3e}")


class NonzeroIndexError(HombifError):
    exit_code = 2


class AssumptionError(HombifError):
    """Raised by front ends when a validator diagnostic fails."""

    exit_code = 2

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        failed = ", ".join(d.name for d in self.diagnostics if not d.passed)
        super().__init__(f"assumption check failed: {failed}")


class SamplingError(HombifError):
    """Loop sampling too coarse for frame transport."""

    exit_code = 3


class InconsistentParityError(HombifError):
    exit_code = 3


class InvertibilityError(HombifError):
    exit_code = 3


class NonConvergenceError(HombifError):
    exit_code = 3

    def __init__(self, message, residual=None, iterations=None):
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)


class OutOfRegimeError(HombifError):
    exit_code = 3


class ConfigError(HombifError):
    exit_code = 4
