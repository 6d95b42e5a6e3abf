"""Point-based baselines: P3P from three 2D-3D correspondences, and the
construction that turns a single AC into three point correspondences.

The P3P solver uses the classical distance formulation: the three pairwise
distance equations between the unknown point depths reduce to a quartic in
one depth ratio; each admissible root is polished by Newton iterations on the
distance system and converted to a pose by rigid alignment of the three
camera-frame points with their world positions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfigurationError
from .geometry import AffineCorrespondence, OrientedPoint, Pose, unproject
from .solvers import CHEIRALITY_EPS, SolutionSet

_COLLINEAR_TOL = 1e-9
_RAY_SEPARATION_TOL = 1e-12

# Canonical-frame scale used when no detector supplies one (benchmarks, the
# localizer): roughly a 20-pixel feature support at the default focal length.
# Larger frames make the affine extrapolation of the query points break down;
# much smaller ones collapse the generated triangle and P3P's conditioning.
BENCHMARK_FRAME_SCALE = 0.02


@dataclass(frozen=True)
class PointCorrespondence:
    """A 3D world point and its normalized 2D observation in the query image."""

    world_point: np.ndarray
    observation: np.ndarray

    def __post_init__(self):
        w = np.array(self.world_point, dtype=np.float64)
        o = np.array(self.observation, dtype=np.float64)
        if w.shape != (3,) or o.shape != (2,):
            raise ValueError("world_point must be length 3, observation length 2")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(o))):
            raise ValueError("non-finite correspondence")
        w.setflags(write=False)
        o.setflags(write=False)
        object.__setattr__(self, "world_point", w)
        object.__setattr__(self, "observation", o)


@dataclass(frozen=True)
class CanonicalAffineFrame:
    """Affine map from the detector's canonical frame to the reference image."""

    Ax: np.ndarray

    def __post_init__(self):
        Ax = np.array(self.Ax, dtype=np.float64)
        if Ax.shape != (2, 2):
            raise ValueError("Ax must be 2x2")
        if abs(np.linalg.det(Ax)) < 1e-12:
            raise ValueError("canonical frame must be invertible")
        Ax.setflags(write=False)
        object.__setattr__(self, "Ax", Ax)

    @staticmethod
    def identity(scale: float = 1.0) -> "CanonicalAffineFrame":
        return CanonicalAffineFrame(scale * np.eye(2))


def scale_canonical_frame(frame: CanonicalAffineFrame, scale: float) -> CanonicalAffineFrame:
    """Scale the canonical frame so generated points sit at a configurable
    feature-scale offset."""
    if not scale > 0:
        raise ValueError("scale must be positive")
    return CanonicalAffineFrame(frame.Ax * scale)


def _grunert_quartic(a2, b2, c2, cab, cac, cbc):
    """Quartic in v = s3/s1 from the pairwise distance equations."""
    q4 = (a2 ** 2 - 2 * a2 * b2 - 2 * a2 * c2 + b2 ** 2
          - 4 * b2 * c2 * cbc ** 2 + 2 * b2 * c2 + c2 ** 2)
    q3 = -4 * (a2 ** 2 * cac - a2 * b2 * cab * cbc - a2 * b2 * cac
               - 2 * a2 * c2 * cac + b2 ** 2 * cab * cbc - b2 * c2 * cab * cbc
               - 2 * b2 * c2 * cac * cbc ** 2 + b2 * c2 * cac + c2 ** 2 * cac)
    q2 = 2 * (2 * a2 ** 2 * cac ** 2 + a2 ** 2 - 2 * a2 * b2 * cab ** 2
              - 4 * a2 * b2 * cab * cac * cbc - 4 * a2 * c2 * cac ** 2
              - 2 * a2 * c2 + 2 * b2 ** 2 * cab ** 2 + 2 * b2 ** 2 * cbc ** 2
              - b2 ** 2 - 4 * b2 * c2 * cab * cac * cbc - 2 * b2 * c2 * cbc ** 2
              + 2 * c2 ** 2 * cac ** 2 + c2 ** 2)
    q1 = -4 * (a2 ** 2 * cac - 2 * a2 * b2 * cab ** 2 * cac - a2 * b2 * cab * cbc
               + a2 * b2 * cac - 2 * a2 * c2 * cac + b2 ** 2 * cab * cbc
               - b2 * c2 * cab * cbc - b2 * c2 * cac + c2 ** 2 * cac)
    q0 = (a2 ** 2 - 4 * a2 * b2 * cab ** 2 + 2 * a2 * b2 - 2 * a2 * c2
          + b2 ** 2 - 2 * b2 * c2 + c2 ** 2)
    return np.array([q4, q3, q2, q1, q0])


def _polish_depths(s, cab, cac, cbc, a2, b2, c2, iterations: int = 8):
    for _ in range(iterations):
        F = np.array([
            s[1] ** 2 + s[2] ** 2 - 2 * s[1] * s[2] * cbc - a2,
            s[0] ** 2 + s[2] ** 2 - 2 * s[0] * s[2] * cac - b2,
            s[0] ** 2 + s[1] ** 2 - 2 * s[0] * s[1] * cab - c2,
        ])
        J = np.array([
            [0.0, 2 * s[1] - 2 * s[2] * cbc, 2 * s[2] - 2 * s[1] * cbc],
            [2 * s[0] - 2 * s[2] * cac, 0.0, 2 * s[2] - 2 * s[0] * cac],
            [2 * s[0] - 2 * s[1] * cab, 2 * s[1] - 2 * s[0] * cab, 0.0],
        ])
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        s = s + step
        if np.abs(step).max() < 1e-14:
            break
    return s


def solve_p3p(c1: PointCorrespondence, c2: PointCorrespondence,
              c3: PointCorrespondence) -> SolutionSet:
    """Up to four poses consistent with three point correspondences.

    Raises DegenerateConfigurationError for collinear world points or
    coincident observation rays.
    """
    Xw = np.stack([c.world_point for c in (c1, c2, c3)])
    obs = np.stack([c.observation for c in (c1, c2, c3)])
    span = np.cross(Xw[1] - Xw[0], Xw[2] - Xw[0])
    extent = max(np.linalg.norm(Xw[1] - Xw[0]), np.linalg.norm(Xw[2] - Xw[0]))
    if np.linalg.norm(span) < _COLLINEAR_TOL * max(1.0, extent ** 2):
        raise DegenerateConfigurationError("world points are collinear")
    f = np.hstack([obs, np.ones((3, 1))])
    f /= np.linalg.norm(f, axis=1, keepdims=True)
    cab, cac, cbc = float(f[0] @ f[1]), float(f[0] @ f[2]), float(f[1] @ f[2])
    if min(1 - cab ** 2, 1 - cac ** 2, 1 - cbc ** 2) < _RAY_SEPARATION_TOL:
        raise DegenerateConfigurationError("observation rays coincide")
    a2 = float(np.sum((Xw[1] - Xw[2]) ** 2))
    b2 = float(np.sum((Xw[0] - Xw[2]) ** 2))
    c2 = float(np.sum((Xw[0] - Xw[1]) ** 2))

    quartic = _grunert_quartic(a2, b2, c2, cab, cac, cbc)
    if np.abs(quartic).max() == 0.0:
        raise DegenerateConfigurationError("distance system is degenerate")
    vroots = np.roots(np.trim_zeros(quartic, "f"))

    poses, residuals, flags = [], [], []
    scale2 = max(a2, b2, c2)
    for v in vroots:
        if abs(v.imag) > 1e-8:
            continue
        v = float(v.real)
        Bv = 1 + v * v - 2 * v * cac
        if Bv <= 0:
            continue
        # first distance equation as a quadratic in u, given v
        aa = -b2
        bb = 2 * b2 * v * cbc
        cc = a2 * Bv - b2 * v * v
        disc = bb * bb - 4 * aa * cc
        if disc < 0:
            continue
        sq = np.sqrt(disc)
        branches = ((-bb + sq) / (2 * aa), (-bb - sq) / (2 * aa))
        # the remaining equation screens the spurious branch; always keep the
        # better one so conditioning loss cannot reject every candidate
        def branch_residual(u):
            Cu = 1 + u * u - 2 * u * cab
            Au = u * u + v * v - 2 * u * v * cbc
            return abs(a2 * Cu - c2 * Au)
        res0, res1 = branch_residual(branches[0]), branch_residual(branches[1])
        best_res = min(res0, res1)
        for u, bres in zip(branches, (res0, res1)):
            if bres > 1e-6 * scale2 and bres > best_res:
                continue
            s1 = np.sqrt(b2 / Bv)
            s = np.array([s1, u * s1, v * s1])
            if np.any(s <= 0):
                continue
            s = _polish_depths(s, cab, cac, cbc, a2, b2, c2)
            Xc = s[:, None] * f
            mu_w = Xw.mean(axis=0)
            mu_c = Xc.mean(axis=0)
            H = (Xc - mu_c).T @ (Xw - mu_w)
            U, _, Vt = np.linalg.svd(H)
            D = np.diag([1.0, 1.0, float(np.sign(np.linalg.det(U @ Vt)))])
            R = U @ D @ Vt
            t = mu_c - R @ mu_w
            # reprojection residual over the three points
            proj = Xw @ R.T + t
            if np.any(np.abs(proj[:, 2]) < 1e-12):
                continue
            res = float(np.abs(proj[:, :2] / proj[:, 2:3] - obs).max())
            if any(np.linalg.norm(R - P.R) + np.linalg.norm(t - P.t) < 1e-8
                   for P in poses):
                continue
            poses.append(Pose(R, t))
            residuals.append(res)
            flags.append(bool(np.all(proj[:, 2] > CHEIRALITY_EPS)))
    if not poses:
        return SolutionSet.empty()
    return SolutionSet(poses=tuple(poses), algebraic_residuals=np.array(residuals),
                       cheirality_flags=np.array(flags, dtype=bool))


def expand_ac_to_points(ac: AffineCorrespondence, op: OrientedPoint,
                        frame: CanonicalAffineFrame) -> tuple:
    """Three point correspondences from one AC: the original match plus two
    generated from the canonical-frame offsets [1, 0] and [0, 1].

    Reference points move by Ax b; query points follow the affine map A; the
    3D points come from intersecting the new reference rays with the local
    plane.
    """
    corrs = [PointCorrespondence(world_point=op.point, observation=ac.y)]
    for b in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
        xi = ac.x + frame.Ax @ b
        yi = ac.y + ac.A @ (xi - ac.x)
        Xi = unproject(xi, op)
        corrs.append(PointCorrespondence(world_point=Xi, observation=yi))
    return tuple(corrs)
