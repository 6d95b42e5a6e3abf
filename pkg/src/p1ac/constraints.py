"""Linear constraints induced by one affine correspondence on the query pose.

One AC plus one oriented point yields six equations that are linear and
homogeneous in the twelve entries of [R | t]: two from the requirement that
the 3D point projects onto the query observation, four from equating the
local affine map with the analytic warp Jacobian (cleared of its
denominator).  The same six equations are also assembled over the Cayley
monomial basis, where they are linear in s*t and quadratic in the rotation
parameters; Gauss-Jordan elimination of s*t then leaves a three-quadric
system in (x, y, z).

vec([R | t]) ordering is row-major R followed by t:
(r11, r12, r13, r21, ..., r33, t1, t2, t3).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConstraintError, EliminationSingularError
from .geometry import AffineCorrespondence, OrientedPoint, homogeneous

# Monomial basis of the Cayley-form system:
# P = [s*t1, s*t2, s*t3, x^2, xy, xz, y^2, yz, z^2, x, y, z, 1]
MONOMIALS_13 = ("st1", "st2", "st3", "x2", "xy", "xz", "y2", "yz", "z2",
                "x", "y", "z", "1")

# Coefficients of the Cayley numerator entries (s * R) over the monomial
# basis [x^2, xy, xz, y^2, yz, z^2, x, y, z, 1], rows in vec(R) order.
_CAYLEY_NUMERATOR = np.zeros((9, 10))
_CAYLEY_NUMERATOR[0, [0, 3, 5, 9]] = [1, -1, -1, 1]     # 1 + x^2 - y^2 - z^2
_CAYLEY_NUMERATOR[1, [1, 8]] = [2, -2]                  # 2(xy - z)
_CAYLEY_NUMERATOR[2, [2, 7]] = [2, 2]                   # 2(y + xz)
_CAYLEY_NUMERATOR[3, [1, 8]] = [2, 2]                   # 2(xy + z)
_CAYLEY_NUMERATOR[4, [0, 3, 5, 9]] = [-1, 1, -1, 1]     # 1 - x^2 + y^2 - z^2
_CAYLEY_NUMERATOR[5, [4, 6]] = [2, -2]                  # 2(yz - x)
_CAYLEY_NUMERATOR[6, [2, 7]] = [2, -2]                  # 2(xz - y)
_CAYLEY_NUMERATOR[7, [4, 6]] = [2, 2]                   # 2(x + yz)
_CAYLEY_NUMERATOR[8, [0, 3, 5, 9]] = [-1, -1, 1, 1]     # 1 - x^2 - y^2 + z^2


@dataclass(frozen=True)
class LinearConstraintSystem:
    """Six rows over vec([R | t]); rows are normalized to unit norm."""

    M: np.ndarray

    def residual(self, R: np.ndarray, t: np.ndarray) -> float:
        vec = np.concatenate([np.asarray(R).reshape(-1), np.asarray(t)])
        return float(np.abs(self.M @ vec).max())


@dataclass(frozen=True)
class MonomialConstraintSystem:
    """Six rows over the 13-monomial Cayley basis."""

    M13: np.ndarray

    def residual(self, cayley: np.ndarray, st: np.ndarray) -> float:
        return float(np.abs(self.M13 @ monomial_vector_13(cayley, st)).max())


@dataclass(frozen=True)
class ReducedQuadricSystem:
    """Three quadrics in (x, y, z) plus back-substitution data for s*t.

    C is 3x10 over [x^2, xy, xz, y^2, yz, z^2, x, y, z, 1]; B is 3x10 mapping
    the same monomial vector to s*t (st = -B @ mon), one row per component.
    """

    C: np.ndarray
    B: np.ndarray

    def recover_scaled_translation(self, cayley: np.ndarray) -> np.ndarray:
        return -(self.B @ monomial_vector_10(cayley))


def monomial_vector_10(cayley: np.ndarray) -> np.ndarray:
    x, y, z = cayley
    return np.array([x * x, x * y, x * z, y * y, y * z, z * z, x, y, z, 1.0])


def monomial_vector_13(cayley: np.ndarray, st: np.ndarray) -> np.ndarray:
    return np.concatenate([st, monomial_vector_10(cayley)])


def build_linear_system(ac: AffineCorrespondence, op: OrientedPoint,
                        eps: float = 1e-12) -> LinearConstraintSystem:
    """Assemble the 6x12 homogeneous system M with M @ vec([R | t]) = 0.

    Rows 1-2: projection of the 3D point onto the query observation (the
    homogeneous query point supplies v).  Rows 3-6: m*A = m*J cleared of the
    denominator m = (n.x_h)(d r3.x_h + t3).
    """
    xt = homogeneous(ac.x)
    p = op.d * xt
    n = op.n
    nx = float(n @ xt)
    if abs(nx) < eps:
        raise DegenerateConstraintError("plane grazes the reference ray")
    y = ac.y
    M = np.zeros((6, 12))
    # y1*(r3.p + t3) - (r1.p + t1) = 0
    M[0, 0:3] = -p
    M[0, 6:9] = y[0] * p
    M[0, 9] = -1.0
    M[0, 11] = y[0]
    # y2*(r3.p + t3) - (r2.p + t2) = 0
    M[1, 3:6] = -p
    M[1, 6:9] = y[1] * p
    M[1, 10] = -1.0
    M[1, 11] = y[1]
    # m*a_kl - [d nx (r_kl - y_k r_3l) + (t_k - t3 y_k) n_l] = 0
    row = 2
    dnx = op.d * nx
    for k in range(2):
        for l in range(2):
            a = ac.A[k, l]
            M[row, 3 * k + l] = -dnx
            M[row, 6 + l] += dnx * y[k]
            M[row, 6] += a * dnx * ac.x[0]
            M[row, 7] += a * dnx * ac.x[1]
            M[row, 8] += a * dnx
            M[row, 9 + k] = -n[l]
            M[row, 11] += a * nx + n[l] * y[k]
            row += 1
    # unit row norms condition the SVD; the six constraints mix units
    M /= np.linalg.norm(M, axis=1, keepdims=True)
    return LinearConstraintSystem(M=M)


def build_monomial_system(ac: AffineCorrespondence, op: OrientedPoint,
                          eps: float = 1e-12) -> MonomialConstraintSystem:
    """Substitute the Cayley form of R into the six constraints and multiply
    by s, giving rows over [s*t | quadratic monomials of (x, y, z)]."""
    M = build_linear_system(ac, op, eps=eps).M
    M13 = np.empty((6, 13))
    M13[:, 0:3] = M[:, 9:12]
    M13[:, 3:13] = M[:, 0:9] @ _CAYLEY_NUMERATOR
    return MonomialConstraintSystem(M13=M13)


def eliminate_translation(sys: MonomialConstraintSystem,
                          pivot_tol: float = 1e-10) -> ReducedQuadricSystem:
    """Gauss-Jordan elimination of the s*t block with partial pivoting.

    The three pivot-free rows left behind are the quadrics in (x, y, z); the
    pivot rows give the linear back-substitution for s*t.
    """
    W = sys.M13.copy()
    threshold = pivot_tol * np.abs(W[:, :3]).max()
    remaining = list(range(6))
    pivot_rows = []
    for col in range(3):
        pivot = max(remaining, key=lambda r: abs(W[r, col]))
        if abs(W[pivot, col]) < threshold:
            raise EliminationSingularError(
                f"s*t block rank deficient (pivot {W[pivot, col]:.3e} in column {col})")
        remaining.remove(pivot)
        pivot_rows.append(pivot)
        W[pivot] /= W[pivot, col]
        for r in range(6):
            if r != pivot:
                W[r] -= W[r, col] * W[pivot]
    C = W[remaining][:, 3:]
    B = W[pivot_rows][:, 3:]
    return ReducedQuadricSystem(C=C, B=B)
