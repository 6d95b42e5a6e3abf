"""FastAPI service wrapping the solvers, benchmark experiments, scene
generation, and the robust localizer.

Every capability of the benchmark CLI is exposed as an endpoint; the CLI is a
thin client of this app (in-process by default, remote with --server).
"""

from __future__ import annotations

import io

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import P1acError
from ..geometry import pose_error
from ..p3p import CanonicalAffineFrame, expand_ac_to_points, solve_p3p
from ..reports import ExperimentReport
from ..sceneio import scene_from_document, scene_to_document
from ..solvers import filter_cheirality, solve_p1ac_3q3, solve_p1ac_nullspace
from ..synthetic import NoiseSpec, run_noise_sweep, run_stability, run_timings
from ..localize import localize, simulate_scene
from .models import (ExperimentResponse, GenSceneRequest, LocalizeRequest,
                     LocalizeResponse, NoiseSweepRequest, PoseErrorModel,
                     SolutionSetModel, SolveP1ACRequest, SolveP3P1ACRequest,
                     SolveP3PRequest, StabilityRequest, TimingRowModel,
                     TimingsRequest, TimingsResponse)


def create_app() -> FastAPI:
    app = FastAPI(title="p1ac", version=__version__,
                  description="Absolute pose from a single affine correspondence: "
                              "minimal solvers, benchmarks, and robust localization.")

    @app.exception_handler(P1acError)
    async def _domain_error(request, exc: P1acError):
        raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/solve/p1ac", response_model=SolutionSetModel)
    def solve_p1ac(req: SolveP1ACRequest) -> SolutionSetModel:
        problem = req.problem.to_domain()
        try:
            if req.method == "p1ac-null":
                sols = solve_p1ac_nullspace(problem)
            else:
                sols = solve_p1ac_3q3(problem, seed=req.seed)
            if req.cheirality_filter:
                sols = filter_cheirality(sols, problem)
        except P1acError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return SolutionSetModel.from_domain(sols)

    @app.post("/solve/p3p", response_model=SolutionSetModel)
    def solve_p3p_endpoint(req: SolveP3PRequest) -> SolutionSetModel:
        try:
            sols = solve_p3p(*[c.to_domain() for c in req.correspondences])
        except P1acError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return SolutionSetModel.from_domain(sols)

    @app.post("/solve/p3p-1ac", response_model=SolutionSetModel)
    def solve_p3p_1ac(req: SolveP3P1ACRequest) -> SolutionSetModel:
        problem = req.problem.to_domain()
        try:
            corrs = expand_ac_to_points(problem.ac, problem.op,
                                        CanonicalAffineFrame.identity(req.frame_scale))
            sols = solve_p3p(*corrs)
        except P1acError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return SolutionSetModel.from_domain(sols)

    @app.post("/experiments/stability", response_model=ExperimentResponse)
    def stability(req: StabilityRequest) -> ExperimentResponse:
        report = run_stability(n=req.n, seed=req.seed, methods=req.methods)
        return ExperimentResponse(csv=report.to_csv(), summary=report.summary())

    @app.post("/experiments/noise-sweep", response_model=ExperimentResponse)
    def noise_sweep(req: NoiseSweepRequest) -> ExperimentResponse:
        report = run_noise_sweep(point_grid=req.point_grid,
                                 affine_grid=req.affine_grid,
                                 normal_grid=req.normal_grid,
                                 n=req.n, seed=req.seed, methods=req.methods,
                                 focal_px=req.focal_px)
        return ExperimentResponse(csv=report.to_csv(), summary=report.summary())

    @app.post("/experiments/timings", response_model=TimingsResponse)
    def timings(req: TimingsRequest) -> TimingsResponse:
        result = run_timings(n=req.n, seed=req.seed, methods=req.methods)
        buf = io.StringIO()
        buf.write("method,mean_us,median_us,trials\n")
        rows = []
        for row in result["rows"]:
            rows.append(TimingRowModel(**row))
            buf.write(f"{row['method']},{row['mean_us']!r},{row['median_us']!r},"
                      f"{row['trials']}\n")
        return TimingsResponse(rows=rows, csv=buf.getvalue())

    @app.post("/scenes/generate")
    def generate_scene(req: GenSceneRequest) -> dict:
        noise = NoiseSpec(point_sigma_px=req.point_sigma_px,
                          affine_sigma=req.affine_sigma,
                          normal_sigma_deg=req.normal_sigma_deg,
                          focal_px=req.focal_px)
        scene, corrs = simulate_scene(outlier_ratio=req.outlier_ratio,
                                      count=req.correspondences, noise=noise,
                                      seed=req.seed,
                                      num_references=req.num_references)
        return scene_to_document(scene, corrs)

    @app.post("/localize", response_model=LocalizeResponse)
    def localize_endpoint(req: LocalizeRequest) -> LocalizeResponse:
        try:
            scene, corrs = scene_from_document(req.scene)
        except (ValueError, KeyError, TypeError) as exc:
            raise HTTPException(status_code=422, detail=f"bad scene document: {exc}")
        try:
            result = localize(corrs, scene, req.config.to_domain(), solver=req.method)
        except P1acError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        error = None
        if scene.query_truth is not None and result.succeeded:
            e = pose_error(result.pose, scene.query_truth)
            error = PoseErrorModel(angular_deg=e.angular, position=e.position)
        return LocalizeResponse.from_domain(result, error)

    return app


app = create_app()
