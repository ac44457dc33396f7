"""Exception types raised across the package."""


class SL2FlowError(Exception):
    """Base class for all package errors."""


class NotOnManifold(SL2FlowError, ValueError):
    """Data is not on SL(2,R) or its tangent bundle within tolerance."""


class SingularChart(SL2FlowError, ValueError):
    """A polar chart was evaluated at (or integrated into) q1 <= 0."""


class ToleranceExceeded(SL2FlowError, RuntimeError):
    """Invariant drift exceeded the configured budget."""


class NoCriticalPoint(SL2FlowError, ValueError):
    pass


class NotPeriodic(SL2FlowError, ValueError):
    pass


class EmptyLevelSet(SL2FlowError, ValueError):
    pass


class ParameterOutOfRange(SL2FlowError, ValueError):
    pass


class NotConvergent(SL2FlowError, RuntimeError):
    pass


class NotUnbounded(SL2FlowError, ValueError):
    pass


class KappaMismatch(SL2FlowError, ValueError):
    pass


class IntegrationFailed(SL2FlowError, RuntimeError):
    """The step-size controller gave up (step underflow or step budget)."""
