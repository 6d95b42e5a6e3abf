"""Synthetic problem generation, noise models, and the benchmark experiments.

A problem instance places the reference camera at the origin, draws a random
rotation and unit translation for the query camera, and samples three
oriented points on the reference image plane (depth 4 to 8), each giving one
affine correspondence via the plane-induced homography.  The P1AC solvers use
the first correspondence; P3P consumes the point pairs from all three.

Noise is injected in pixels (point observations, converted through a focal
length), in raw matrix entries (affine), and in degrees (normal direction).
All draws are unit-scaled and multiplied by their sigma, so sweeping a sigma
over a grid reuses identical underlying perturbation draws per problem index;
methods that ignore a noise channel see bit-identical inputs along that axis.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import P1acError
from .geometry import (AffineCorrespondence, OrientedPoint, Pose, homogeneous,
                       pose_error, project)
from .p3p import (BENCHMARK_FRAME_SCALE, CanonicalAffineFrame,
                  PointCorrespondence, expand_ac_to_points, solve_p3p)
from .reports import FAILURE_ANGULAR, ExperimentReport, ReportRow
from .rng import random_rotation, random_unit_vector, substream
from .solvers import (P1ACProblem, SolutionSet, filter_cheirality,
                      solve_p1ac_3q3, solve_p1ac_nullspace)

DEFAULT_FOCAL_PX = 1000.0
METHODS = ("p3p", "p3p-1ac", "p1ac-null", "p1ac-3q3")

_ACS_PER_PROBLEM = 3
_MIN_QUERY_DEPTH = 1e-2
_MIN_RAY_DOT = 0.05
_MAX_RETRIES = 1000


@dataclass(frozen=True)
class NoiseSpec:
    """Standard deviations of the three noise channels."""

    point_sigma_px: float = 0.0
    affine_sigma: float = 0.0
    normal_sigma_deg: float = 0.0
    focal_px: float = DEFAULT_FOCAL_PX

    def __post_init__(self):
        if min(self.point_sigma_px, self.affine_sigma, self.normal_sigma_deg) < 0:
            raise ValueError("noise sigmas must be non-negative")
        if not self.focal_px > 0:
            raise ValueError("focal length must be positive")

    @property
    def point_sigma_calibrated(self) -> float:
        return self.point_sigma_px / self.focal_px

    def is_zero(self) -> bool:
        return (self.point_sigma_px == 0.0 and self.affine_sigma == 0.0
                and self.normal_sigma_deg == 0.0)


@dataclass(frozen=True)
class SyntheticProblem:
    """Ground-truth query pose and three P1AC problems sharing it."""

    truth: Pose
    problems: tuple
    rng_seed: int

    @property
    def point_correspondences(self):
        """The (world point, query observation) pairs used by P3P."""
        return [(p.op.point, p.ac.y) for p in self.problems]


def plane_homography(pose: Pose, op: OrientedPoint) -> np.ndarray:
    """Calibrated homography induced by the local plane of op between the
    reference camera and the query camera given by pose."""
    return pose.R + np.outer(pose.t, op.n) / (op.n @ op.point)


def affine_from_homography(H: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Differential of u -> project(H u_h) at x: the affine matrix of the AC."""
    w = H @ homogeneous(x)
    v = w[:2] / w[2]
    return (H[:2, :2] - np.outer(v, H[2, :2])) / w[2]


def _sample_oriented_correspondence(rng, truth: Pose):
    """One oriented point on the reference image plane plus its AC, rejecting
    configurations behind the query camera or grazing the plane."""
    for _ in range(_MAX_RETRIES):
        x = rng.uniform(-1.0, 1.0, size=2)
        d = rng.uniform(4.0, 8.0)
        xt = homogeneous(x)
        p = d * xt
        q = truth.R @ p + truth.t
        if q[2] < _MIN_QUERY_DEPTH:
            continue
        n = random_unit_vector(rng)
        if n @ p > 0:
            n = -n                      # normals face the reference camera
        if abs(n @ xt) < _MIN_RAY_DOT:
            continue
        op = OrientedPoint(x=x, d=d, n=n)
        y = project(q)
        A = affine_from_homography(plane_homography(truth, op), x)
        return P1ACProblem(ac=AffineCorrespondence(x=x, y=y, A=A), op=op)
    raise P1acError("failed to sample a valid oriented correspondence")


def generate_problem(seed: int) -> SyntheticProblem:
    """Deterministic random problem: reference camera at the origin, query
    camera with Haar-random rotation and unit translation, three ACs."""
    rng = substream(seed, "problem")
    for _ in range(_MAX_RETRIES):
        R = random_rotation(rng)
        t = random_unit_vector(rng)
        truth = Pose(R, t)
        try:
            problems = tuple(_sample_oriented_correspondence(rng, truth)
                             for _ in range(_ACS_PER_PROBLEM))
        except P1acError:
            continue
        return SyntheticProblem(truth=truth, problems=problems, rng_seed=int(seed))
    raise P1acError("failed to generate a problem instance")


def _rotate_about_axis(v: np.ndarray, axis: np.ndarray, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return v * c + np.cross(axis, v) * s + axis * (axis @ v) * (1 - c)


def apply_noise(problem: SyntheticProblem, spec: NoiseSpec, seed: int) -> SyntheticProblem:
    """Perturb query observations, affine entries, and normals; the ground
    truth is untouched.  Zero sigmas return the problem unchanged bit-exactly."""
    if spec.is_zero():
        return problem
    rng = substream(seed, "noise")
    noisy = []
    for pr in problem.problems:
        # unit draws are always consumed, so different sigmas on the same seed
        # perturb along identical directions
        dy = rng.normal(size=2)
        dA = rng.normal(size=(2, 2))
        axis = random_unit_vector(rng)
        angle_unit = abs(rng.normal())
        y = pr.ac.y + spec.point_sigma_calibrated * dy
        A = pr.ac.A + spec.affine_sigma * dA
        n = pr.op.n
        if spec.normal_sigma_deg > 0:
            angle = math.radians(spec.normal_sigma_deg) * angle_unit
            n = _rotate_about_axis(n, axis, angle)
            n = n / np.linalg.norm(n)
        op = OrientedPoint(x=pr.op.x, d=pr.op.d, n=n) if spec.normal_sigma_deg > 0 else pr.op
        ac = AffineCorrespondence(x=pr.ac.x, y=y, A=A)
        noisy.append(P1ACProblem(ac=ac, op=op, ref_pose=pr.ref_pose))
    return SyntheticProblem(truth=problem.truth, problems=tuple(noisy),
                            rng_seed=problem.rng_seed)


def solve_with_method(method: str, sp: SyntheticProblem, seed: int) -> SolutionSet:
    """Run one solver on a synthetic instance and cheirality-filter the
    result.  Degenerate-configuration errors come back as empty sets."""
    pr = sp.problems[0]
    try:
        if method == "p1ac-null":
            return filter_cheirality(solve_p1ac_nullspace(pr), pr)
        if method == "p1ac-3q3":
            return filter_cheirality(solve_p1ac_3q3(pr, seed=seed), pr)
        if method == "p3p":
            corrs = [PointCorrespondence(world_point=p, observation=y)
                     for p, y in sp.point_correspondences]
            return solve_p3p(*corrs)
        if method == "p3p-1ac":
            corrs = expand_ac_to_points(
                pr.ac, pr.op, CanonicalAffineFrame.identity(BENCHMARK_FRAME_SCALE))
            return solve_p3p(*corrs)
    except P1acError:
        return SolutionSet.empty()
    raise ValueError(f"unknown method {method!r}")


def best_pose_error(solutions: SolutionSet, truth: Pose):
    """Error of the best member of a solution set; (180, inf) for empty sets."""
    if len(solutions) == 0:
        return FAILURE_ANGULAR, float("inf")
    best = None
    for pose in solutions.poses:
        e = pose_error(pose, truth)
        score = e.angular + e.position
        if best is None or score < best[0]:
            best = (score, e)
    e = best[1]
    return e.angular, e.position


def _methods_arg(methods):
    methods = tuple(methods) if methods else METHODS
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    return methods


def instance_seed(seed: int, index: int) -> int:
    """Per-problem seed derived from the base seed; rows record seed:index."""
    return int(substream(seed, "instance", index).integers(0, 2 ** 63 - 1))


def run_cells(cells, n: int, seed: int, methods=None) -> ExperimentReport:
    """Shared experiment driver: for each noise cell, solve n problems with
    every method.  Problems are generated once per index and re-noised per
    cell with shared unit draws, so cells differing in one sigma share all
    other randomness."""
    methods = _methods_arg(methods)
    report = ExperimentReport()
    for i in range(n):
        problem_seed = instance_seed(seed, i)
        base = generate_problem(problem_seed)
        for spec in cells:
            noisy = apply_noise(base, spec, seed=problem_seed)
            for method in methods:
                t0 = time.perf_counter()
                sols = solve_with_method(method, noisy, seed=problem_seed)
                dt_us = (time.perf_counter() - t0) * 1e6
                ang, pos = best_pose_error(sols, base.truth)
                report.append(ReportRow(
                    method=method,
                    point_sigma_px=spec.point_sigma_px,
                    affine_sigma=spec.affine_sigma,
                    normal_sigma_deg=spec.normal_sigma_deg,
                    angular_err_deg=ang,
                    position_err=pos,
                    solve_time_us=dt_us,
                    seed=f"{seed}:{i}",
                ))
    return report


def run_stability(n: int, seed: int = 0, methods=None) -> ExperimentReport:
    """Zero-noise accuracy distribution over n random instances."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return run_cells([NoiseSpec()], n=n, seed=seed, methods=methods)


def run_noise_sweep(point_grid, affine_grid, normal_grid, n: int,
                    seed: int = 0, methods=None,
                    focal_px: float = DEFAULT_FOCAL_PX) -> ExperimentReport:
    """Mean/median error over the Cartesian grid of noise sigmas, n problems
    per cell."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cells = [NoiseSpec(point_sigma_px=p, affine_sigma=a, normal_sigma_deg=g,
                       focal_px=focal_px)
             for p in point_grid for a in affine_grid for g in normal_grid]
    return run_cells(cells, n=n, seed=seed, methods=methods)


# default grids for the two standard sweeps
FIG3_POINT_GRID = tuple(np.linspace(0.0, 10.0, 11))
FIG3_AFFINE_GRID = (0.0, 0.01, 0.02, 0.03, 0.04, 0.05)
FIG3_NORMAL_FIXED_DEG = 1.0
FIG4_NORMAL_GRID = tuple(np.linspace(0.0, 10.0, 11))
FIG4_AFFINE_FIXED = 0.01


def run_timings(n: int, seed: int = 0, methods=None, warmup: int = 20) -> dict:
    """Mean wall-clock per solver call over n zero-noise problems.

    Problems are pre-generated so only the solve is timed; the first `warmup`
    calls per method are excluded.  Needs n >= 1.
    """
    if n < 1:
        raise ValueError("timing run needs at least one trial")
    methods = _methods_arg(methods)
    problems = []
    for i in range(n):
        problem_seed = substream(seed, "instance", i).integers(0, 2 ** 63 - 1)
        problems.append((problem_seed, generate_problem(problem_seed)))
    rows = []
    for method in methods:
        times = np.empty(n)
        for i, (pseed, sp) in enumerate(problems):
            t0 = time.perf_counter()
            solve_with_method(method, sp, seed=pseed)
            times[i] = time.perf_counter() - t0
        kept = times[min(warmup, max(0, n - 1)):] * 1e6
        rows.append({
            "method": method,
            "mean_us": float(kept.mean()),
            "median_us": float(np.median(kept)),
            "trials": int(kept.size),
        })
    return {"rows": rows, "n": n, "seed": seed}
