"""Exception types shared across the package."""


class GradFlowError(Exception):
    """Base class for all library errors."""


class StepTooLarge(GradFlowError):
    """Time step tau is not inside (0, tau_star) for the given energy."""


class InnerSolveFailed(GradFlowError):
    """The inner minimization did not certify stationarity.

    Attributes carry the residual reached, the iteration count and, when the
    failure happened inside a trajectory loop, the failing step index k.
    """

    def __init__(self, message, residual=None, iterations=None, step_index=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.step_index = step_index


class NonFiniteObjective(GradFlowError):
    """Objective or gradient evaluated to NaN/inf at a feasible point."""


class OutOfRange(GradFlowError):
    """Evaluation time lies outside the trajectory's covered interval."""


class DimensionMismatch(GradFlowError):
    """Operands live on grids of different sizes."""


class NonMonotone(GradFlowError):
    """An inverse-CDF vector is not strictly increasing."""


class InitialNotMonotone(GradFlowError):
    """A sampled initial inverse CDF violates monotonicity."""


class AntipodalPoint(GradFlowError):
    """Log map (or a chart solve) hit the antipode, where it is undefined."""


class GridMismatch(GradFlowError):
    """Comparison grids are not nested (non-integer step ratios)."""


class DegenerateInput(GradFlowError):
    """Input admits no meaningful answer (e.g. non-positive errors in a fit)."""


class PreconditionViolated(GradFlowError):
    """A documented precondition of the operation does not hold."""
