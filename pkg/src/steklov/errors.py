"""Exception hierarchy shared by all modules."""


class SteklovError(Exception):
    """Base class for every error raised by the package."""


class NonPositiveSample(SteklovError, ValueError):
    """A function expected to be strictly positive has a non-positive sample."""


class AliasingRisk(SteklovError, ValueError):
    """The sampling grid is too coarse for the requested degrees."""


class NormalizationError(SteklovError, ValueError):
    """The mean of 1/a deviates from 1 by more than the stored tolerance."""


class DegenerateMap(SteklovError, ValueError):
    """A conformal map has (nearly) vanishing derivative on the closed disk."""


class MeanNotZero(SteklovError, ValueError):
    """A variation direction violates its zero-mean side condition."""


class ComplexityLimit(SteklovError, RuntimeError):
    """The algebraic zeta invariant would enumerate too many index tuples."""


class PoleAtOne(SteklovError, ValueError):
    """Riemann zeta (or zeta_a) requested at its pole s = 1."""


class EigensolveFailure(SteklovError, RuntimeError):
    """The dense Hermitian eigensolver did not converge."""


class QuadratureBudget(SteklovError, RuntimeError):
    """The resolvent quadrature cannot reach the requested accuracy."""


class PositivityLost(SteklovError, RuntimeError):
    """A flow step produced a factor that is not strictly positive."""


class StepCollapse(SteklovError, RuntimeError):
    """Adaptive step halving exhausted its budget."""


class InputError(SteklovError, ValueError):
    """Malformed function input (JSON, grid samples or expression)."""
