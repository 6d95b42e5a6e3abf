"""Pydantic request/response models for the HTTP service, plus converters to
and from the core domain types."""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator

from ..geometry import AffineCorrespondence, OrientedPoint, Pose
from ..localize import LocalizationResult, RansacConfig
from ..p3p import BENCHMARK_FRAME_SCALE, PointCorrespondence
from ..solvers import P1ACProblem, SolutionSet
from ..synthetic import DEFAULT_FOCAL_PX

MethodName = Literal["p3p", "p3p-1ac", "p1ac-null", "p1ac-3q3"]


class PoseModel(BaseModel):
    rotation: list[float] = Field(..., min_length=9, max_length=9,
                                  description="row-major 3x3 rotation")
    translation: list[float] = Field(..., min_length=3, max_length=3)

    @staticmethod
    def from_pose(pose: Pose) -> "PoseModel":
        return PoseModel(rotation=[float(v) for v in pose.R.reshape(-1)],
                         translation=[float(v) for v in pose.t])

    def to_pose(self) -> Pose:
        return Pose(np.array(self.rotation).reshape(3, 3),
                    np.array(self.translation))


class OrientedPointModel(BaseModel):
    x: list[float] = Field(..., min_length=2, max_length=2)
    d: float = Field(..., gt=0)
    n: list[float] = Field(..., min_length=3, max_length=3)

    def to_domain(self) -> OrientedPoint:
        return OrientedPoint(x=np.array(self.x), d=self.d, n=np.array(self.n))


class AffineCorrespondenceModel(BaseModel):
    x: list[float] = Field(..., min_length=2, max_length=2)
    y: list[float] = Field(..., min_length=2, max_length=2)
    A: list[float] = Field(..., min_length=4, max_length=4,
                           description="row-major 2x2 affine matrix")

    def to_domain(self) -> AffineCorrespondence:
        return AffineCorrespondence(x=np.array(self.x), y=np.array(self.y),
                                    A=np.array(self.A).reshape(2, 2))


class P1ACProblemModel(BaseModel):
    ac: AffineCorrespondenceModel
    oriented_point: OrientedPointModel
    ref_pose: Optional[PoseModel] = None

    def to_domain(self) -> P1ACProblem:
        ref = self.ref_pose.to_pose() if self.ref_pose else Pose.identity()
        return P1ACProblem(ac=self.ac.to_domain(),
                           op=self.oriented_point.to_domain(), ref_pose=ref)


class PointCorrespondenceModel(BaseModel):
    world_point: list[float] = Field(..., min_length=3, max_length=3)
    observation: list[float] = Field(..., min_length=2, max_length=2)

    def to_domain(self) -> PointCorrespondence:
        return PointCorrespondence(world_point=np.array(self.world_point),
                                   observation=np.array(self.observation))


class SolutionModel(BaseModel):
    pose: PoseModel
    algebraic_residual: float
    cheirality: bool


class SolutionSetModel(BaseModel):
    solutions: list[SolutionModel]
    count: int

    @staticmethod
    def from_domain(sols: SolutionSet) -> "SolutionSetModel":
        out = [SolutionModel(pose=PoseModel.from_pose(p),
                             algebraic_residual=float(r), cheirality=bool(c))
               for p, r, c in zip(sols.poses, sols.algebraic_residuals,
                                  sols.cheirality_flags)]
        return SolutionSetModel(solutions=out, count=len(out))


class SolveP1ACRequest(BaseModel):
    problem: P1ACProblemModel
    method: Literal["p1ac-null", "p1ac-3q3"] = "p1ac-3q3"
    seed: int = 0
    cheirality_filter: bool = False


class SolveP3PRequest(BaseModel):
    correspondences: list[PointCorrespondenceModel] = Field(..., min_length=3,
                                                            max_length=3)


class SolveP3P1ACRequest(BaseModel):
    problem: P1ACProblemModel
    frame_scale: float = Field(default=BENCHMARK_FRAME_SCALE, gt=0)


class StabilityRequest(BaseModel):
    n: int = Field(..., ge=1)
    seed: int = 0
    methods: Optional[list[MethodName]] = None


class ExperimentResponse(BaseModel):
    csv: str
    summary: dict


class NoiseSweepRequest(BaseModel):
    point_grid: list[float]
    affine_grid: list[float]
    normal_grid: list[float]
    n: int = Field(..., ge=1)
    seed: int = 0
    methods: Optional[list[MethodName]] = None
    focal_px: float = Field(default=DEFAULT_FOCAL_PX, gt=0)

    @field_validator("point_grid", "affine_grid", "normal_grid")
    @classmethod
    def _non_empty_non_negative(cls, grid):
        if not grid:
            raise ValueError("grid must not be empty")
        if any(v < 0 for v in grid):
            raise ValueError("noise sigmas must be non-negative")
        return grid


class TimingRowModel(BaseModel):
    method: str
    mean_us: float
    median_us: float
    trials: int


class TimingsRequest(BaseModel):
    n: int = Field(..., ge=1)
    seed: int = 0
    methods: Optional[list[MethodName]] = None


class TimingsResponse(BaseModel):
    rows: list[TimingRowModel]
    csv: str


class GenSceneRequest(BaseModel):
    num_references: int = Field(default=4, ge=1)
    correspondences: int = Field(default=200, ge=1)
    outlier_ratio: float = Field(default=0.5, ge=0.0, lt=1.0)
    point_sigma_px: float = Field(default=0.0, ge=0)
    affine_sigma: float = Field(default=0.0, ge=0)
    normal_sigma_deg: float = Field(default=0.0, ge=0)
    focal_px: float = Field(default=DEFAULT_FOCAL_PX, gt=0)
    seed: int = 0


class RansacConfigModel(BaseModel):
    inlier_threshold_px: float = Field(default=16.0, gt=0)
    max_iterations: int = Field(default=1000, ge=1)
    lo_steps: int = Field(default=10, ge=0)
    ls_iterations: int = Field(default=10, ge=1)
    confidence: float = Field(default=0.99, gt=0.0, lt=1.0)
    min_inliers: int = Field(default=10, ge=1)
    focal_px: float = Field(default=DEFAULT_FOCAL_PX, gt=0)
    seed: int = 0

    def to_domain(self) -> RansacConfig:
        return RansacConfig(**self.model_dump())


class LocalizeRequest(BaseModel):
    scene: dict
    method: MethodName = "p1ac-3q3"
    config: RansacConfigModel = RansacConfigModel()


class PoseErrorModel(BaseModel):
    angular_deg: float
    position: float


class LocalizeResponse(BaseModel):
    pose: PoseModel
    inlier_count: int
    iterations: int
    elapsed_ms: float
    succeeded: bool
    error_vs_truth: Optional[PoseErrorModel] = None

    @staticmethod
    def from_domain(result: LocalizationResult,
                    error: Optional[PoseErrorModel] = None) -> "LocalizeResponse":
        return LocalizeResponse(pose=PoseModel.from_pose(result.pose),
                                inlier_count=result.inlier_count,
                                iterations=result.iterations,
                                elapsed_ms=result.elapsed_ms,
                                succeeded=result.succeeded,
                                error_vs_truth=error)
