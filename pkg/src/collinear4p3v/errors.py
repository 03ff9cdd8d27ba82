"""Exception hierarchy for the solver pipeline.

Degenerate-instance conditions are deliberately separate classes so callers
can distinguish "this input is outside the method's domain" from "the
algebraic identities the pipeline relies on failed to hold" (which indicates
a bug or a measure-zero input).
"""


class SolverError(Exception):
    """Base class for all package-specific errors."""


# ---------------------------------------------------------------------------
# exact-arithmetic kernel


class ZeroInput(SolverError):
    """An operand required to be nonzero was zero."""


class NotDivisible(SolverError):
    """An exact polynomial division left a nonzero remainder."""


class NotASquare(SolverError):
    """Polynomial square root requested of a non-square."""


class BadIndex(SolverError):
    """Combinatorial index outside its admissible range."""


class NotSymmetric(SolverError):
    """Polynomial lacks the reciprocal symmetry required for reduction."""


class DegreeMismatch(SolverError):
    """A polynomial came out with an unexpected degree."""


# ---------------------------------------------------------------------------
# geometry / instance conditions


class DegenerateView(SolverError):
    """View cannot be normalized (vanishing denominator in the angle formulas)."""


class BehindCamera(SolverError):
    """A point has nonpositive depth in some camera."""


class ClearingFailed(NotDivisible):
    """A symbolic clearing factor did not divide the constraint determinant."""


class DegenerateTranslation(SolverError):
    """Translation ratio formulas have a vanishing denominator."""


class GimbalDegenerate(SolverError):
    """Euler-angle formulas undefined at this rotation."""


class DegenerateTwist(SolverError):
    """Twisted-pair transform undefined (zero component or denominator)."""


class WDenominatorZero(SolverError):
    """All constraint pairs gave a vanishing denominator for the w recovery."""


class DegenerateV(SolverError):
    """v-recovery denominator 1 + s*u vanished."""


class NoCheiralConfig(SolverError):
    """None of the four pose branches puts the scene in front of the cameras."""


class ParallelRays(SolverError):
    """Triangulation rays are parallel (x_1i == x'_2i)."""


class DegenerateTz(SolverError):
    """Baseline direction has (numerically) zero z component."""


class NoSolution(SolverError):
    """No candidate root survived back-substitution and cheirality."""


class ZeroVector(SolverError):
    """Angular comparison of a zero-length vector."""
