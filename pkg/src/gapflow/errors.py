"""Exception types raised by the library."""


class GapFlowError(Exception):
    """Base class for all library errors."""


class RankDeficiency(GapFlowError):
    """A basis matrix does not have full column rank."""


class AmbientMismatch(GapFlowError):
    """Operands live in different ambient inner-product spaces."""


class IntervalMismatch(GapFlowError):
    """Operator paths are defined over different parameter intervals."""


class NotAProjection(GapFlowError):
    """Input matrix is not idempotent within tolerance."""


class DegenerateInput(GapFlowError):
    """An inner matrix that must be inverted is singular."""


class SurjectivityFailure(GapFlowError):
    """A family member is not surjective (row rank deficient)."""

    def __init__(self, t, message=""):
        self.t = t
        super().__init__(message or f"family member at t={t} is not surjective")


class DegenerateEndpoint(GapFlowError):
    """An endpoint operator has a nontrivial kernel."""

    def __init__(self, t, smallest=None):
        self.t = t
        self.smallest = smallest
        detail = f" (smallest |eigenvalue| {smallest:.3e})" if smallest is not None else ""
        super().__init__(f"operator at endpoint t={t} is degenerate{detail}")


class SubdivisionLimit(GapFlowError):
    """Bisection hit the depth limit with a persistent interior degeneracy."""


class OutOfInterval(GapFlowError):
    """Evaluation parameter lies outside the open interval (0, 1)."""


class BadCutoff(GapFlowError):
    """Cutoff function violates its boundary or plateau contract."""


class PreconditionViolated(GapFlowError):
    """A stated hypothesis of the requested criterion does not hold."""


class NewtonDivergence(GapFlowError):
    """Newton iteration failed to converge."""

    def __init__(self, t, iterations, residual):
        self.t = t
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"Newton did not converge at t={t} after {iterations} iterations "
            f"(residual {residual:.3e})"
        )


class AllTrivial(GapFlowError):
    """Every branch solve collapsed to the zero solution."""


class ConfigError(GapFlowError):
    """Run configuration is malformed."""
