"""Exception hierarchy shared by every module."""


class ThreeBodyError(Exception):
    """Base class for all errors raised by trilambert."""


class DomainError(ThreeBodyError, ValueError):
    """Argument outside the real domain of a function."""


class IterationError(ThreeBodyError, ArithmeticError):
    """An iterative solver failed to converge."""


class BranchDomain(DomainError):
    """Lambert-W argument left the real domain of the selected branch."""


class DegenerateRadius(ThreeBodyError, ValueError):
    """A polar angle is undefined because the radius is zero."""


class ZeroMassPair(ThreeBodyError, ValueError):
    """Barycenter of two massless bodies requested."""


class NonEscaping(ThreeBodyError):
    """Surrogate energy constant B is not positive (bound radial motion)."""


class ZeroRadialRate(NonEscaping):
    """Automatic sign selection met a zero surrogate range rate."""


class AlreadyInvalid(ThreeBodyError):
    """The surrogate separation starts at or inside the binomial margin 2k."""


class QuadratureFailure(ThreeBodyError, ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance."""


class CollisionSingularity(ThreeBodyError, ArithmeticError):
    """Two bodies occupy the same position."""


class CollinearSingularity(ThreeBodyError, ArithmeticError):
    """Two bodies share a polar angle; the unit-vector direction law is undefined."""


class StepFailure(ThreeBodyError, ArithmeticError):
    """Integrator step size underflowed."""


class MaxSteps(ThreeBodyError, ArithmeticError):
    """Integrator exhausted its step budget."""


class DisjointIntervals(ThreeBodyError, ValueError):
    """Two trajectories share no common time interval."""


class ScenarioError(ThreeBodyError, ValueError):
    """Malformed or invalid scenario file."""


class ValidityViolation(ThreeBodyError):
    """A validity condition failed while running in strict mode."""
