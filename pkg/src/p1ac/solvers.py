"""Minimal absolute-pose solvers from one affine correspondence plus one
oriented 3D point.

Both solvers consume the same six linear constraints.  The nullspace solver
keeps the twelve entries of [R | t] as unknowns and enforces orthogonality on
the nullspace coefficients; the 3Q3 solver substitutes the Cayley rotation
parameterization, eliminates the scaled translation, and intersects the three
remaining quadrics.  Each returns up to eight candidate poses.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nullspace
from .constraints import (build_linear_system, build_monomial_system,
                          eliminate_translation, monomial_vector_10)
from .errors import RankDeficientError
from .geometry import (AffineCorrespondence, CayleyRotation, OrientedPoint,
                       Pose, cayley_to_matrix, change_reference_frame,
                       homogeneous, nearest_rotation)
from .re3q3 import solve_3q3

# Poses with orthonormality error beyond this are dropped; smaller errors are
# repaired by projection onto the nearest rotation.
_MAX_ORTHO_ERROR = 1e-4

# Looser than the geometry epsilon: a hypothesis is "in front" if the point
# depth in the query camera clears this.
CHEIRALITY_EPS = 1e-6

_RANK_TOL = 1e-8


@dataclass(frozen=True)
class P1ACProblem:
    """One AC, one oriented point, and the world pose of the reference camera
    (identity when the problem is already expressed in the reference frame)."""

    ac: AffineCorrespondence
    op: OrientedPoint
    ref_pose: Pose = field(default_factory=Pose.identity)


@dataclass(frozen=True)
class SolutionSet:
    """Candidate poses with per-pose diagnostics.

    algebraic_residuals holds the max violation of the six (row-normalized)
    linear constraints; cheirality_flags marks poses that put the observed
    point in front of the query camera.
    """

    poses: tuple
    algebraic_residuals: np.ndarray
    cheirality_flags: np.ndarray

    def __len__(self) -> int:
        return len(self.poses)

    @staticmethod
    def empty() -> "SolutionSet":
        return SolutionSet(poses=(), algebraic_residuals=np.zeros(0),
                           cheirality_flags=np.zeros(0, dtype=bool))


def _assemble(problem: P1ACProblem, candidates: list, M: np.ndarray) -> SolutionSet:
    """Normalize, validate, and package candidate [R | t] vectors."""
    p = problem.op.point
    poses, residuals, flags = [], [], []
    for P in candidates:
        R = np.array(P[:9], dtype=np.float64).reshape(3, 3)
        t = np.array(P[9:], dtype=np.float64)
        scale = np.linalg.norm(R[:, 0])
        if scale < 1e-12:
            continue
        R /= scale
        t /= scale
        if np.linalg.det(R) < 0:
            R, t = -R, -t
        if np.linalg.norm(R.T @ R - np.eye(3)) > _MAX_ORTHO_ERROR:
            continue
        R = nearest_rotation(R)
        vec = np.concatenate([R.reshape(-1), t])
        residual = float(np.abs(M @ vec).max())
        q3 = float((R @ p + t)[2])
        poses.append(change_reference_frame(problem.ref_pose, Pose(R, t)))
        residuals.append(residual)
        flags.append(q3 > CHEIRALITY_EPS)
    if not poses:
        return SolutionSet.empty()
    return SolutionSet(poses=tuple(poses),
                       algebraic_residuals=np.array(residuals),
                       cheirality_flags=np.array(flags, dtype=bool))


def solve_p1ac_nullspace(problem: P1ACProblem) -> SolutionSet:
    """Nullspace solver: vec([R | t]) = B b with orthogonality enforced on b.

    Raises RankDeficientError when the constraint matrix is not rank 6.  An
    empty solution set (no real solutions) is a valid outcome, not an error.
    """
    lin = build_linear_system(problem.ac, problem.op)
    U, sv, Vt = np.linalg.svd(lin.M)
    if sv[5] < _RANK_TOL * sv[0]:
        raise RankDeficientError("constraint matrix rank below 6")
    B = Vt[6:].T
    candidates = nullspace.solve_orthogonality_system(B)
    return _assemble(problem, candidates, lin.M)


def solve_p1ac_3q3(problem: P1ACProblem, seed: int | None = None) -> SolutionSet:
    """Cayley/3Q3 solver: eliminate s*t, intersect three quadrics, back
    substitute.

    Ground-truth rotations at/near 180 degrees are not representable in the
    Cayley chart and may be missed; the solver still returns whatever valid
    poses exist.  seed drives the 3Q3 kernel's random change of variables.
    """
    lin = build_linear_system(problem.ac, problem.op)
    mono = build_monomial_system(problem.ac, problem.op)
    reduced = eliminate_translation(mono)
    roots = solve_3q3(reduced.C, rng=seed)
    candidates = []
    for c in roots.roots:
        s = 1.0 + float(c @ c)
        st = reduced.recover_scaled_translation(c)
        R = cayley_to_matrix(CayleyRotation(*c))
        candidates.append(np.concatenate([R.reshape(-1), st / s]))
    return _assemble(problem, candidates, lin.M)


def filter_cheirality(solutions: SolutionSet, problem: P1ACProblem) -> SolutionSet:
    """Keep poses that see the observed point in front of the query camera.

    The input set keeps its flags, so the unfiltered candidates remain
    retrievable from it.
    """
    keep = solutions.cheirality_flags
    if len(solutions) == 0 or bool(keep.all()):
        return solutions
    idx = np.flatnonzero(keep)
    return SolutionSet(
        poses=tuple(solutions.poses[i] for i in idx),
        algebraic_residuals=solutions.algebraic_residuals[idx],
        cheirality_flags=solutions.cheirality_flags[idx],
    )
