class DimensionError(ValueError):
    """Vector or matrix sizes do not agree."""


class NumericalBlowUp(ArithmeticError):
    """A trajectory produced non-finite values.

    ``t`` is the time of the first non-finite state.
    """

    def __init__(self, t, message=None):
        self.t = float(t)
        super().__init__(message or f"non-finite state at t={self.t:.6g}")


class EigenConvergenceError(ArithmeticError):
    """The dense eigensolver failed to converge."""


class ConvergenceError(ArithmeticError):
    """An iterative solver stopped without meeting its tolerance.

    ``reason`` is one of ``"max_iter"``, ``"singular"``, ``"diverged"``,
    ``"stalled"``.
    """

    def __init__(self, reason, message=None):
        self.reason = reason
        super().__init__(message or reason)


class SusceptibilityOverflow(OverflowError):
    def __init__(self, tau):
        self.tau = float(tau)
        super().__init__(f"susceptibility overflows double precision at tau={self.tau:.6g}")
