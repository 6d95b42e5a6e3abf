"""Exception types raised by the solvers and geometry layer."""


class P1acError(Exception):
    """Base class for all library errors."""


class DegenerateInputError(P1acError, ValueError):
    """Geometric input outside the operation's domain (zero depth, grazing ray,
    vanishing projection denominator)."""


class UnrepresentableRotationError(P1acError, ValueError):
    """Rotation at or near 180 degrees cannot be expressed in Cayley parameters."""


class DegenerateConstraintError(P1acError, ValueError):
    """Constraint assembly hit a degenerate configuration (plane grazing the
    reference ray)."""


class EliminationSingularError(P1acError, ValueError):
    """Translation block of the monomial system is rank deficient; Gauss-Jordan
    elimination has no usable pivot."""


class DegenerateSystemError(P1acError, ValueError):
    """Polynomial system reduced to an identically zero determinant, i.e. an
    infinite solution family."""


class RankDeficientError(P1acError, ValueError):
    """Linear constraint matrix does not have the generic rank required by the
    solver."""


class DegenerateConfigurationError(P1acError, ValueError):
    """Point configuration unusable for P3P (collinear world points or
    duplicate observation rays)."""


class InsufficientCorrespondencesError(P1acError, ValueError):
    """Not enough correspondences for the requested estimator."""
