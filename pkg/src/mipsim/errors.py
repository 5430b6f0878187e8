"""Exception taxonomy shared across the package.

Every error raised by library code derives from MipsimError so callers can
distinguish domain failures from programming bugs.
"""


class MipsimError(Exception):
    """Base class for all library errors."""


class OutOfCatalog(MipsimError, ValueError):
    """Kernel family/parameter combination outside the supported catalog."""


class DomainError(MipsimError, ValueError):
    """Evaluation requested outside an operation's domain (e.g. a singular
    kernel at the origin)."""


class UnsupportedSymbol(MipsimError):
    """The kernel family has no Fourier symbol available."""


class DivergentNorm(MipsimError, ValueError):
    """Requested Lebesgue norm of a kernel diverges for the given exponent."""


class QuadratureFailure(MipsimError):
    """A quadrature self-check failed or a tolerance target is unreachable
    at the configured resolution."""


class BumpUnderresolved(MipsimError, ValueError):
    """Mollifier support covers fewer than two grid cells per axis."""


class NonProbability(MipsimError, ValueError):
    """Input expected to be a probability measure is not (wrong mass or
    negative weights beyond tolerance)."""


class NoConvergence(MipsimError):
    """Iterative solver failed to reach its tolerance within the iteration
    budget."""


class BadMixture(MipsimError, ValueError):
    """Invalid Gaussian mixture specification."""


class BlowUpDetected(MipsimError):
    """The PDE norm guard tripped (or values went non-finite) at t_blow.

    The recorded t_blow is a lower bound for the maximal existence time.
    """

    def __init__(self, t_blow: float, message: str = ""):
        self.t_blow = float(t_blow)
        super().__init__(message or f"blow-up detected at t = {t_blow:.6g}")


class NotCompleted(MipsimError):
    """Results past the blow-up time of a truncated PDE run were requested."""


class DeltaOutOfRange(MipsimError, ValueError):
    """Sobolev trade-off parameter delta outside (0, 1)."""


class EmptyWindow(MipsimError, ValueError):
    """Admissibility window for the scaling exponent is empty."""


class ConfigError(MipsimError, ValueError):
    """Experiment configuration failed validation.

    Carries the full list of violations so a user sees every problem at
    once rather than one per run.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
