"""Exception hierarchy shared by all qcsma modules."""


class QcsmaError(Exception):
    """Base class for all package errors."""


class InvalidSpec(QcsmaError):
    """A network parameter set violates one of its invariants."""


class TabulatedOutOfRange(QcsmaError):
    """Evaluation point outside the tabulated domain (no extrapolation)."""


class HorizonExceeded(QcsmaError):
    """Upper external rates requested beyond their defining horizon."""


class FrozenRateZero(QcsmaError):
    """Frozen activation rate vanished where a positive rate is required."""


class NoBracket(QcsmaError):
    """Root bracketing for the critical time scale failed."""


class UnsupportedRateKind(QcsmaError):
    """Closed-form results are unavailable for this rate-function kind."""


class SingularSystem(QcsmaError):
    """Hitting-time linear system is singular (target unreachable)."""


class NonpositiveConstant(QcsmaError):
    """A deviation constant that must be positive is not."""


class InsufficientSamples(QcsmaError):
    """Trajectory grid too coarse to certify the queue tube."""


class TooFewSamples(QcsmaError):
    """Not enough uncensored replicas for the requested statistic."""


class AllCensored(QcsmaError):
    """Every replica in the batch was censored."""


class DegenerateSpan(QcsmaError):
    """Scaling-exponent fit requested on a degenerate r grid."""


class MajorantViolated(QcsmaError):
    """A coupled queue exceeded the shared-clock majorant."""


class CouplingUndefined(QcsmaError):
    """The upper coupling is undefined (isolated pre-transition too late)."""


class ParseError(QcsmaError):
    """Config file malformed or contains unknown keys."""
