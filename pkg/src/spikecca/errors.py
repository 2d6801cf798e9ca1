"""Exception types shared across the library.

The split matters for the command line driver: configuration and domain
problems are user errors, while singularity / branch failures indicate a
numerical breakdown and get a distinct exit code.
"""


class SpikeCcaError(Exception):
    """Base class for all errors raised by this library."""


class ConfigurationError(SpikeCcaError, ValueError):
    """A dimension or configuration constraint was violated."""


class DomainError(SpikeCcaError, ValueError):
    """A scalar argument lies outside the mathematical domain of an operation."""


class BelowThresholdError(DomainError):
    """An eigenvalue at or below the bulk edge admits no consistent estimate."""


class UnsupportedModelError(SpikeCcaError, ValueError):
    """The requested operation does not support this model configuration."""


class NumericalError(SpikeCcaError, ArithmeticError):
    """A numerical computation failed or produced values outside its validated range."""


class SingularityError(NumericalError):
    """A matrix block was numerically singular.

    Carries the name of the offending block and a condition estimate so the
    caller can report what went wrong.
    """

    def __init__(self, block: str, condition: float, message: str | None = None):
        self.block = block
        self.condition = condition
        if message is None:
            message = (
                f"block {block!r} is numerically singular "
                f"(condition estimate {condition:.3e})"
            )
        super().__init__(message)


class ResolventSingularityError(SingularityError):
    """The resolvent argument is too close to an eigenvalue to invert."""


class BranchError(NumericalError):
    """Evaluation point lies on a branch cut of a square-root transform."""


class SpectrumRangeError(NumericalError):
    """Computed eigenvalues left [0, 1] by more than the permitted slack."""
