"""Exception hierarchy.

Two branches matter to callers: `ValidationError` for inputs that violate a
documented precondition (CLI exit code 2) and `NumericalError` for situations
where the mathematics or the floating-point evaluation gives up (CLI exit
code 3).
"""


class GTKernelsError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GTKernelsError):
    """Input violates a documented precondition."""


class NumericalError(GTKernelsError):
    """A numerical procedure failed or a hypothesis does not hold."""


class EmptySpectrum(ValidationError):
    pass


class LevelOutOfRange(ValidationError):
    pass


class SizeGuard(ValidationError):
    """Exact-arithmetic path refused an input that is too large."""


class OverlappingBoxes(ValidationError):
    """Pair statistics requested for boxes that are not disjoint."""


class NonHermitian(ValidationError):
    pass


class PointMass(NumericalError):
    """Saddle analysis requires a measure that is not a single point mass."""


class PoleProximity(NumericalError):
    """Evaluation point too close to an atom or to the support cut."""


class AtomCollision(NumericalError):
    """Kernel argument coincides with a top-row point."""


class MultipleUpperRoots(NumericalError):
    """More than one upper-half-plane root survived polishing."""


class OutsideBulk(NumericalError):
    """Closed-form saddle requested outside its interval(s)."""


class QuadratureNonConvergence(NumericalError):
    pass


class ContourSeparationFailure(NumericalError):
    """No admissible circle separates the two pole groups."""


class NonConvergence(NumericalError):
    """An iteration hit its hard cap without meeting tolerance."""
