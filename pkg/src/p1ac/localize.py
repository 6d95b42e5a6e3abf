"""Robust absolute-pose estimation over many correspondences with outliers.

LO-RANSAC with a pluggable minimal solver: the P1AC solvers hypothesize from
a single correspondence, the P3P baseline needs three, and P3P(1AC) expands
one AC into three points.  Hypotheses are scored by inlier counting on point
reprojection error (points behind the camera are always outliers), the best
model is polished by damped least squares on its inliers from the first
improvement onward, and the loop stops adaptively from the best inlier
ratio.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (DegenerateConfigurationError, InsufficientCorrespondencesError,
                     P1acError)
from .geometry import AffineCorrespondence, OrientedPoint, Pose
from .p3p import (BENCHMARK_FRAME_SCALE, CanonicalAffineFrame,
                  PointCorrespondence, expand_ac_to_points, solve_p3p)
from .solvers import P1ACProblem, filter_cheirality, solve_p1ac_3q3, solve_p1ac_nullspace
from .synthetic import (DEFAULT_FOCAL_PX, NoiseSpec, affine_from_homography,
                        plane_homography)
from .rng import random_rotation, random_unit_vector, substream

SOLVER_SAMPLE_SIZE = {"p1ac-null": 1, "p1ac-3q3": 1, "p3p": 3, "p3p-1ac": 1}


@dataclass(frozen=True)
class Correspondence:
    """One AC against a reference image, with the oriented point it observes."""

    ac: AffineCorrespondence
    op: OrientedPoint
    ref_index: int


@dataclass(frozen=True)
class CorrespondenceSet:
    items: tuple
    inlier_mask: Optional[np.ndarray] = None     # ground truth, for simulation

    def __post_init__(self):
        if self.inlier_mask is not None:
            mask = np.asarray(self.inlier_mask, dtype=bool)
            if mask.shape != (len(self.items),):
                raise ValueError("inlier mask length mismatch")
            object.__setattr__(self, "inlier_mask", mask)

    def __len__(self) -> int:
        return len(self.items)

    def subset(self, indices) -> "CorrespondenceSet":
        items = tuple(self.items[i] for i in indices)
        mask = self.inlier_mask[list(indices)] if self.inlier_mask is not None else None
        return CorrespondenceSet(items=items, inlier_mask=mask)


@dataclass(frozen=True)
class Scene:
    """Reference cameras with known poses; the query truth is optional and
    used only for evaluation."""

    reference_poses: tuple
    query_truth: Optional[Pose] = None

    def __post_init__(self):
        if not self.reference_poses:
            raise ValueError("scene needs at least one reference pose")

    def world_point(self, corr: Correspondence) -> np.ndarray:
        ref = self.reference_poses[corr.ref_index]
        return ref.inverse().apply(corr.op.point)


@dataclass(frozen=True)
class RansacConfig:
    inlier_threshold_px: float = 16.0
    max_iterations: int = 1000
    lo_steps: int = 10
    ls_iterations: int = 10
    confidence: float = 0.99
    min_inliers: int = 10
    focal_px: float = DEFAULT_FOCAL_PX
    seed: int = 0

    def __post_init__(self):
        if not self.inlier_threshold_px > 0:
            raise ValueError("inlier threshold must be positive")
        if not (0.0 < self.confidence < 1.0):
            raise ValueError("confidence must be in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class LocalizationResult:
    pose: Pose
    inlier_count: int
    iterations: int
    elapsed_ms: float
    succeeded: bool


def _world_arrays(corrs: CorrespondenceSet, scene: Scene):
    world = np.stack([scene.world_point(c) for c in corrs.items])
    obs = np.stack([c.ac.y for c in corrs.items])
    return world, obs


def _score_arrays(pose: Pose, world: np.ndarray, obs: np.ndarray, threshold: float):
    q = world @ pose.R.T + pose.t
    in_front = q[:, 2] > 1e-9
    z = np.where(in_front, q[:, 2], 1.0)
    residual = np.linalg.norm(q[:, :2] / z[:, None] - obs, axis=1)
    mask = in_front & (residual < threshold)
    return int(mask.sum()), mask


def score_hypothesis(pose: Pose, corrs: CorrespondenceSet, scene: Scene,
                     threshold_px: float, focal_px: float = DEFAULT_FOCAL_PX):
    """Inlier count and mask for a pose hypothesis.

    A correspondence is an inlier when the 3D point reprojects into the query
    within threshold_px (converted to calibrated units); points behind the
    camera never count.
    """
    world, obs = _world_arrays(corrs, scene)
    return _score_arrays(pose, world, obs, threshold_px / focal_px)


def _rodrigues(w: np.ndarray) -> np.ndarray:
    theta = np.linalg.norm(w)
    K = np.array([[0, -w[2], w[1]], [w[2], 0, -w[0]], [-w[1], w[0], 0]])
    if theta < 1e-12:
        return np.eye(3) + K
    a = math.sin(theta) / theta
    b = (1 - math.cos(theta)) / (theta * theta)
    return np.eye(3) + a * K + b * (K @ K)


def _reprojection_cost(pose: Pose, world: np.ndarray, obs: np.ndarray) -> float:
    q = world @ pose.R.T + pose.t
    z = np.where(np.abs(q[:, 2]) > 1e-12, q[:, 2], 1e-12)
    r = q[:, :2] / z[:, None] - obs
    return float(np.sum(r * r))


def refine_non_minimal(pose: Pose, inliers: CorrespondenceSet, scene: Scene,
                       iterations: int = 10) -> Pose:
    """Damped least squares on the 6-DoF pose minimizing point reprojection.

    The rotation moves in a local axis-angle chart around the current
    estimate; accepted steps never increase the cost.  Needs at least four
    inliers; a singular normal system returns the input pose unchanged.
    """
    if len(inliers) < 4:
        raise InsufficientCorrespondencesError("refinement needs >= 4 inliers")
    world, obs = _world_arrays(inliers, scene)
    R = pose.R.copy()
    t = pose.t.copy()
    lam = 1e-6
    cost = _reprojection_cost(Pose(R, t), world, obs)
    for _ in range(iterations):
        q = world @ R.T + t
        z = np.where(np.abs(q[:, 2]) > 1e-12, q[:, 2], 1e-12)
        r = (q[:, :2] / z[:, None] - obs).reshape(-1)
        n = len(world)
        J = np.zeros((2 * n, 6))
        inv_z = 1.0 / z
        # d(projection)/dq rows, then chain through dq/d(omega) = -R [X]x, dq/dt = I
        for i in range(n):
            du = np.array([[inv_z[i], 0.0, -q[i, 0] * inv_z[i] ** 2],
                           [0.0, inv_z[i], -q[i, 1] * inv_z[i] ** 2]])
            X = world[i]
            skew = np.array([[0, -X[2], X[1]], [X[2], 0, -X[0]], [-X[1], X[0], 0]])
            J[2 * i:2 * i + 2, :3] = du @ (-R @ skew)
            J[2 * i:2 * i + 2, 3:] = du
        H = J.T @ J
        g = J.T @ r
        stepped = False
        for _ in range(8):
            try:
                delta = np.linalg.solve(H + lam * np.diag(np.diag(H)) + 1e-15 * np.eye(6), -g)
            except np.linalg.LinAlgError:
                return Pose(R, t)
            Rn = R @ _rodrigues(delta[:3])
            tn = t + delta[3:]
            new_cost = _reprojection_cost(Pose(Rn, tn), world, obs)
            if np.isfinite(new_cost) and new_cost <= cost:
                R, t, cost = Rn, tn, new_cost
                lam = max(lam / 3.0, 1e-12)
                stepped = True
                break
            lam *= 10.0
        if not stepped or np.linalg.norm(delta) < 1e-14:
            break
    return Pose(R, t)


def _hypotheses(solver: str, sample, corrs: CorrespondenceSet, scene: Scene,
                seed: int) -> list:
    """World-frame pose candidates from a minimal sample."""
    if solver in ("p1ac-null", "p1ac-3q3"):
        c = corrs.items[sample[0]]
        problem = P1ACProblem(ac=c.ac, op=c.op,
                              ref_pose=scene.reference_poses[c.ref_index])
        if solver == "p1ac-null":
            sols = solve_p1ac_nullspace(problem)
        else:
            sols = solve_p1ac_3q3(problem, seed=seed)
        return list(filter_cheirality(sols, problem).poses)
    if solver == "p3p":
        pcs = []
        for i in sample:
            c = corrs.items[i]
            pcs.append(PointCorrespondence(world_point=scene.world_point(c),
                                           observation=c.ac.y))
        return list(solve_p3p(*pcs).poses)
    if solver == "p3p-1ac":
        c = corrs.items[sample[0]]
        ref = scene.reference_poses[c.ref_index]
        pcs = expand_ac_to_points(
            c.ac, c.op, CanonicalAffineFrame.identity(BENCHMARK_FRAME_SCALE))
        world_pcs = [PointCorrespondence(world_point=ref.inverse().apply(pc.world_point),
                                         observation=pc.observation)
                     for pc in pcs]
        return list(solve_p3p(*world_pcs).poses)
    raise ValueError(f"unknown solver {solver!r}")


def _adaptive_bound(inlier_ratio: float, sample_size: int, confidence: float,
                    cap: int) -> int:
    if inlier_ratio <= 0.0:
        return cap
    w = min(inlier_ratio, 1.0) ** sample_size
    if w >= 1.0:
        return 1
    denom = math.log1p(-w)
    if denom == 0.0:
        return cap
    bound = math.ceil(math.log(1.0 - confidence) / denom)
    return int(min(max(bound, 1), cap))


def localize(corrs: CorrespondenceSet, scene: Scene, cfg: RansacConfig,
             solver: str = "p1ac-3q3") -> LocalizationResult:
    """Hypothesize-and-verify loop with local optimization and adaptive stop."""
    if solver not in SOLVER_SAMPLE_SIZE:
        raise ValueError(f"unknown solver {solver!r}")
    sample_size = SOLVER_SAMPLE_SIZE[solver]
    n = len(corrs)
    if n < sample_size:
        raise InsufficientCorrespondencesError(
            f"{solver} needs at least {sample_size} correspondences, got {n}")
    t_start = time.perf_counter()
    rng = substream(cfg.seed, "ransac")
    world, obs = _world_arrays(corrs, scene)
    threshold = cfg.inlier_threshold_px / cfg.focal_px

    best_pose = None
    best_count = 0
    best_mask = np.zeros(n, dtype=bool)
    iterations = 0
    max_iterations = cfg.max_iterations
    while iterations < max_iterations:
        iterations += 1
        sample = rng.choice(n, size=sample_size, replace=False)
        hyp_seed = int(rng.integers(0, 2 ** 63 - 1))
        try:
            candidates = _hypotheses(solver, sample, corrs, scene, hyp_seed)
        except (DegenerateConfigurationError, P1acError):
            continue
        improved = False
        for pose in candidates:
            count, mask = _score_arrays(pose, world, obs, threshold)
            if count > best_count:
                best_pose, best_count, best_mask = pose, count, mask
                improved = True
        if improved and best_count >= 4:
            # local optimization on the best-so-far model, from the first
            # improvement onward
            for _ in range(cfg.lo_steps):
                inl = corrs.subset(np.flatnonzero(best_mask))
                refined = refine_non_minimal(best_pose, inl, scene,
                                             iterations=cfg.ls_iterations)
                count, mask = _score_arrays(refined, world, obs, threshold)
                if count > best_count:
                    best_pose, best_count, best_mask = refined, count, mask
                else:
                    break
        if improved:
            max_iterations = min(cfg.max_iterations,
                                 _adaptive_bound(best_count / n, sample_size,
                                                 cfg.confidence, cfg.max_iterations))
    if best_pose is not None and best_count >= 4:
        refined = refine_non_minimal(best_pose, corrs.subset(np.flatnonzero(best_mask)),
                                     scene, iterations=cfg.ls_iterations)
        count, mask = _score_arrays(refined, world, obs, threshold)
        if count >= best_count:
            best_pose, best_count, best_mask = refined, count, mask
    elapsed_ms = (time.perf_counter() - t_start) * 1e3
    if best_pose is None:
        return LocalizationResult(pose=Pose.identity(), inlier_count=0,
                                  iterations=iterations, elapsed_ms=elapsed_ms,
                                  succeeded=False)
    return LocalizationResult(pose=best_pose, inlier_count=best_count,
                              iterations=iterations, elapsed_ms=elapsed_ms,
                              succeeded=best_count >= cfg.min_inliers)


def simulate_scene(outlier_ratio: float, count: int, noise: NoiseSpec,
                   seed: int, num_references: int = 4):
    """Multi-reference scene with a known query pose and planted outliers.

    Outliers replace the query observation and affine matrix with unrelated
    random values; exactly round(outlier_ratio * count) of them are planted
    and recorded in the ground-truth mask.
    """
    if not (0.0 <= outlier_ratio < 1.0):
        raise ValueError("outlier ratio must be in [0, 1)")
    if count < 1:
        raise ValueError("need at least one correspondence")
    rng = substream(seed, "scene")
    for _ in range(50):
        refs = [Pose.identity()]
        for _ in range(num_references - 1):
            axis = random_unit_vector(rng)
            angle = rng.uniform(0.0, math.radians(25.0))
            R = _rodrigues(axis * angle)
            center = rng.uniform(-1.0, 1.0, size=3)
            refs.append(Pose(R, -R @ center))
        truth = Pose(random_rotation(rng), random_unit_vector(rng))
        try:
            items, mask = _simulate_correspondences(rng, refs, truth, count,
                                                    outlier_ratio, noise)
        except P1acError:
            continue
        scene = Scene(reference_poses=tuple(refs), query_truth=truth)
        return scene, CorrespondenceSet(items=tuple(items), inlier_mask=mask)
    raise P1acError("failed to simulate a scene")


def _simulate_correspondences(rng, refs, truth: Pose, count: int,
                              outlier_ratio: float, noise: NoiseSpec):
    from .geometry import homogeneous, project, relative_pose

    n_out = int(round(outlier_ratio * count))
    outlier_idx = set(rng.choice(count, size=n_out, replace=False).tolist()) if n_out else set()
    sigma_cal = noise.point_sigma_calibrated
    items = []
    mask = np.ones(count, dtype=bool)
    for i in range(count):
        ref_index = int(rng.integers(0, len(refs)))
        rel = relative_pose(refs[ref_index], truth)
        for attempt in range(200):
            x = rng.uniform(-1.0, 1.0, size=2)
            d = rng.uniform(4.0, 8.0)
            xt = homogeneous(x)
            p = d * xt
            q = rel.R @ p + rel.t
            if q[2] < 0.05:
                continue
            nvec = random_unit_vector(rng)
            if nvec @ p > 0:
                nvec = -nvec
            if abs(nvec @ xt) < 0.05:
                continue
            break
        else:
            raise P1acError("query camera sees too little of the scene")
        op = OrientedPoint(x=x, d=d, n=nvec)
        y = project(q)
        A = affine_from_homography(plane_homography(rel, op), x)
        if i in outlier_idx:
            y = rng.uniform(-1.0, 1.0, size=2)
            A = rng.normal(size=(2, 2))
            mask[i] = False
        else:
            y = y + sigma_cal * rng.normal(size=2)
            A = A + noise.affine_sigma * rng.normal(size=(2, 2))
            if noise.normal_sigma_deg > 0:
                axis = random_unit_vector(rng)
                angle = math.radians(noise.normal_sigma_deg) * abs(rng.normal())
                nv = _rodrigues(axis * angle) @ op.n
                op = OrientedPoint(x=op.x, d=op.d, n=nv / np.linalg.norm(nv))
        items.append(Correspondence(ac=AffineCorrespondence(x=x, y=y, A=A),
                                    op=op, ref_index=ref_index))
    return items, mask
