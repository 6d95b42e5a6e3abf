"""Core geometric types and operations.

Conventions: cameras are calibrated (K = I) and work in normalized image
coordinates.  A pose [R | t] maps world points into the camera frame,
X_cam = R @ X_world + t.  The reference camera of a two-view problem sits at
the origin with identity rotation; the local surface around an observed point
is planar, given by a depth d along the reference ray and a unit normal n in
the reference frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, UnrepresentableRotationError

# Numerical guard for projection/unprojection denominators.  Solvers apply a
# looser cheirality filter on top of this.
GEOMETRY_EPS = 1e-12

# Tolerance on rotation orthonormality accepted by Pose.
ROTATION_TOL = 1e-9


def _frozen_array(a, shape) -> np.ndarray:
    out = np.array(a, dtype=np.float64)
    if out.shape != shape:
        raise ValueError(f"expected shape {shape}, got {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError("non-finite entries")
    out.setflags(write=False)
    return out


def homogeneous(u: np.ndarray) -> np.ndarray:
    """Append a unit third coordinate to a 2D point."""
    return np.array([u[0], u[1], 1.0])


@dataclass(frozen=True)
class Pose:
    """Rigid transform mapping world coordinates into a camera frame."""

    R: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "R", _frozen_array(self.R, (3, 3)))
        object.__setattr__(self, "t", _frozen_array(self.t, (3,)))
        err = np.linalg.norm(self.R.T @ self.R - np.eye(3))
        if err > ROTATION_TOL:
            raise ValueError(f"R is not orthonormal (|R^T R - I| = {err:.3e})")
        if abs(np.linalg.det(self.R) - 1.0) > ROTATION_TOL:
            raise ValueError("R must have determinant +1")

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    @property
    def center(self) -> np.ndarray:
        """Camera center in world coordinates, c = -R^T t."""
        return -self.R.T @ self.t

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map world points (..., 3) into the camera frame."""
        return points @ self.R.T + self.t

    def inverse(self) -> "Pose":
        return Pose(self.R.T, -self.R.T @ self.t)


@dataclass(frozen=True)
class CayleyRotation:
    """Rational 3-parameter rotation; undefined exactly at 180 degrees."""

    x: float
    y: float
    z: float

    @property
    def s(self) -> float:
        """Normalizer 1 + x^2 + y^2 + z^2 (always >= 1)."""
        return 1.0 + self.x ** 2 + self.y ** 2 + self.z ** 2

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class OrientedPoint:
    """3D point given as depth d along the reference ray through x, with unit
    surface normal n in the reference camera frame."""

    x: np.ndarray
    d: float
    n: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen_array(self.x, (2,)))
        object.__setattr__(self, "n", _frozen_array(self.n, (3,)))
        object.__setattr__(self, "d", float(self.d))
        if not self.d > 0:
            raise ValueError("depth must be positive")
        if abs(np.linalg.norm(self.n) - 1.0) > 1e-12:
            raise ValueError("normal must be unit length")
        if abs(self.n @ homogeneous(self.x)) < GEOMETRY_EPS:
            raise DegenerateInputError("plane grazes the reference ray")

    @property
    def point(self) -> np.ndarray:
        """The 3D point d * [x, 1] in the reference frame."""
        return self.d * homogeneous(self.x)


@dataclass(frozen=True)
class AffineCorrespondence:
    """Point pair across two images plus the 2x2 local affine map A, which
    sends offsets around x in the reference image to offsets around y in the
    query image."""

    x: np.ndarray
    y: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen_array(self.x, (2,)))
        object.__setattr__(self, "y", _frozen_array(self.y, (2,)))
        object.__setattr__(self, "A", _frozen_array(self.A, (2, 2)))

    @property
    def well_posed(self) -> bool:
        """A singular A is flagged here rather than rejected on construction."""
        return abs(float(np.linalg.det(self.A))) > GEOMETRY_EPS


@dataclass(frozen=True)
class ProjectionDifferential:
    """The image-to-image map differential at a reference observation.

    q is the transformed 3D point R p + t, v its projection, m the common
    denominator n.x_h * (d r3.x_h + t3), and J the 2x2 Jacobian of the warp.
    """

    q: np.ndarray
    v: np.ndarray
    m: float
    J: np.ndarray


@dataclass(frozen=True)
class PoseError:
    angular: float          # degrees, in [0, 180]
    position: float         # scene units


def project(p: np.ndarray, eps: float = GEOMETRY_EPS) -> np.ndarray:
    """Pinhole projection [p1/p3, p2/p3]."""
    p = np.asarray(p, dtype=np.float64)
    if abs(p[2]) < eps:
        raise DegenerateInputError("point on the principal plane (p3 ~ 0)")
    return p[:2] / p[2]


def unproject(u: np.ndarray, op: OrientedPoint, eps: float = GEOMETRY_EPS) -> np.ndarray:
    """Intersect the ray through image point u with the local plane of op.

    Returns alpha * u_h with alpha = (n.p) / (n.u_h); for u = op.x this is
    exactly the stored 3D point.
    """
    ut = homogeneous(u)
    denom = op.n @ ut
    if abs(denom) < eps:
        raise DegenerateInputError("ray grazes the local plane")
    alpha = (op.n @ op.point) / denom
    return alpha * ut


def projection_differential(pose: Pose, op: OrientedPoint,
                            eps: float = GEOMETRY_EPS) -> ProjectionDifferential:
    """Analytic differential of u -> project(R unproject(u) + t) at u = op.x.

    J = (1/m) [ d (n.x_h)(R_{1:2,1:2} - v R_{3,1:2}) + (t_{1:2} - t3 v) n_{1:2}^T ]
    with m = (n.x_h)(d (r3.x_h) + t3).
    """
    R, t = pose.R, pose.t
    xt = homogeneous(op.x)
    q = op.d * (R @ xt) + t
    if abs(q[2]) < eps:
        raise DegenerateInputError("transformed point on the query principal plane")
    v = q[:2] / q[2]
    nx = op.n @ xt
    m = nx * (op.d * (R[2] @ xt) + t[2])
    if abs(m) < eps:
        raise DegenerateInputError("degenerate differential (m ~ 0)")
    J = (op.d * nx * (R[:2, :2] - np.outer(v, R[2, :2]))
         + np.outer(t[:2] - t[2] * v, op.n[:2])) / m
    return ProjectionDifferential(q=q, v=v, m=float(m), J=J)


def cayley_to_matrix(c: CayleyRotation) -> np.ndarray:
    """Rotation matrix of the Cayley parameters (x, y, z)."""
    x, y, z = c.x, c.y, c.z
    s = c.s
    return np.array([
        [1 + x * x - y * y - z * z, 2 * (x * y - z), 2 * (y + x * z)],
        [2 * (x * y + z), 1 - x * x + y * y - z * z, 2 * (y * z - x)],
        [2 * (x * z - y), 2 * (x + y * z), 1 - x * x - y * y + z * z],
    ]) / s


def matrix_to_cayley(R: np.ndarray, eps: float = 1e-9) -> CayleyRotation:
    """Inverse of cayley_to_matrix; fails at/near trace(R) = -1 (180 degrees)."""
    R = np.asarray(R, dtype=np.float64)
    denom = 1.0 + float(np.trace(R))
    if denom < eps:
        raise UnrepresentableRotationError(
            "rotation too close to 180 degrees for Cayley parameters")
    return CayleyRotation(
        x=(R[2, 1] - R[1, 2]) / denom,
        y=(R[0, 2] - R[2, 0]) / denom,
        z=(R[1, 0] - R[0, 1]) / denom,
    )


def rotation_angle_deg(Ra: np.ndarray, Rb: np.ndarray) -> float:
    """Angle of the minimal rotation taking Rb to Ra, in degrees.

    Equals arccos((trace(Ra Rb^T) - 1)/2) clamped to [0, 180], but evaluated
    through atan2 of the sine and cosine parts so that errors far below the
    arccos resolution floor (~1e-6 deg) are still measurable.
    """
    K = Ra @ Rb.T
    cos_theta = 0.5 * (np.trace(K) - 1.0)
    cos_theta = min(1.0, max(-1.0, cos_theta))
    sin_vec = 0.5 * np.array([K[2, 1] - K[1, 2], K[0, 2] - K[2, 0], K[1, 0] - K[0, 1]])
    sin_theta = np.linalg.norm(sin_vec)
    return math.degrees(math.atan2(sin_theta, cos_theta))


def pose_error(estimate: Pose, truth: Pose) -> PoseError:
    """Angular error (deg) between the rotations and distance between camera
    centers."""
    return PoseError(
        angular=rotation_angle_deg(estimate.R, truth.R),
        position=float(np.linalg.norm(estimate.center - truth.center)),
    )


def change_reference_frame(ref_pose: Pose, solved_pose: Pose) -> Pose:
    """Compose a pose solved relative to the reference camera frame with the
    reference camera's world pose, giving the query pose in world coordinates."""
    return Pose(solved_pose.R @ ref_pose.R,
                solved_pose.R @ ref_pose.t + solved_pose.t)


def relative_pose(ref_pose: Pose, world_pose: Pose) -> Pose:
    """Inverse of change_reference_frame: express world_pose relative to the
    frame of ref_pose."""
    Rrel = world_pose.R @ ref_pose.R.T
    return Pose(Rrel, world_pose.t - Rrel @ ref_pose.t)


def nearest_rotation(M: np.ndarray) -> np.ndarray:
    """Orthogonal polar factor of M with determinant +1."""
    U, _, Vt = np.linalg.svd(M)
    R = U @ Vt
    if np.linalg.det(R) < 0:
        R = U @ np.diag([1.0, 1.0, -1.0]) @ Vt
    return R
