"""Absolute camera pose from a single affine correspondence (P1AC).

Minimal solvers (nullspace and Cayley/3Q3), P3P baselines, synthetic
benchmarks, and an LO-RANSAC localizer, exposed as a library, an HTTP
service, and a benchmark CLI.
"""

from .geometry import (AffineCorrespondence, CayleyRotation, OrientedPoint,
                       Pose, PoseError, ProjectionDifferential,
                       cayley_to_matrix, change_reference_frame,
                       matrix_to_cayley, pose_error, project,
                       projection_differential, unproject)
from .re3q3 import QuadricTriple, RootSet, polish_root, solve_3q3
from .solvers import (P1ACProblem, SolutionSet, filter_cheirality,
                      solve_p1ac_3q3, solve_p1ac_nullspace)
from .p3p import (CanonicalAffineFrame, PointCorrespondence,
                  expand_ac_to_points, scale_canonical_frame, solve_p3p)
from .synthetic import (NoiseSpec, SyntheticProblem, apply_noise,
                        generate_problem, run_noise_sweep, run_stability,
                        run_timings)
from .localize import (Correspondence, CorrespondenceSet, LocalizationResult,
                       RansacConfig, Scene, localize, refine_non_minimal,
                       score_hypothesis, simulate_scene)

__version__ = "0.1.0"

__all__ = [
    "AffineCorrespondence", "CayleyRotation", "OrientedPoint", "Pose",
    "PoseError", "ProjectionDifferential", "cayley_to_matrix",
    "change_reference_frame", "matrix_to_cayley", "pose_error", "project",
    "projection_differential", "unproject",
    "QuadricTriple", "RootSet", "polish_root", "solve_3q3",
    "P1ACProblem", "SolutionSet", "filter_cheirality", "solve_p1ac_3q3",
    "solve_p1ac_nullspace",
    "CanonicalAffineFrame", "PointCorrespondence", "expand_ac_to_points",
    "scale_canonical_frame", "solve_p3p",
    "NoiseSpec", "SyntheticProblem", "apply_noise", "generate_problem",
    "run_noise_sweep", "run_stability", "run_timings",
    "Correspondence", "CorrespondenceSet", "LocalizationResult",
    "RansacConfig", "Scene", "localize", "refine_non_minimal",
    "score_hypothesis", "simulate_scene",
    "__version__",
]
