"""HTTP facade over the simulation engine.

Endpoints accept the full experiment configuration inline, so the service
is stateless: validate a configuration, run one seeded episode, or run a
whole multi-seed experiment per request.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..config import parse_config
from ..episode import run_episode, run_experiment
from ..errors import EvidenceConflict, ValidationError
from .schemas import (
    EpisodeRequest,
    EpisodeResponse,
    ExperimentRequest,
    ExperimentResponse,
    SummarySchema,
    TraceSchema,
    ValidateRequest,
    ValidateResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="maintwin",
        description="Adaptive digital-twin simulator for maintenance planning",
        version="0.1.0",
    )

    @app.exception_handler(ValidationError)
    async def _invalid(request: Request, exc: ValidationError) -> JSONResponse:
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(EvidenceConflict)
    async def _conflict(request: Request, exc: EvidenceConflict) -> JSONResponse:
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok"}

    @app.post("/config/validate", response_model=ValidateResponse)
    def validate(request: ValidateRequest) -> ValidateResponse:
        config = parse_config(request.config.to_payload())
        return ValidateResponse(
            valid=True,
            n_states=config.space.n_states,
            n_actions=len(config.actions),
            horizon=config.horizon.steps,
            modes=list(config.settings.modes),
            seeds=list(config.settings.seeds),
        )

    @app.post("/episodes", response_model=EpisodeResponse)
    def episode(request: EpisodeRequest) -> EpisodeResponse:
        config = parse_config(request.config.to_payload())
        trace = run_episode(config, seed=request.seed, mode=request.mode)
        return EpisodeResponse(trace=TraceSchema.from_trace(trace))

    @app.post("/experiments", response_model=ExperimentResponse)
    def experiment(request: ExperimentRequest) -> ExperimentResponse:
        config = parse_config(request.config.to_payload())
        result = run_experiment(config, runs=request.runs, modes=request.modes)
        traces = None
        if request.include_traces:
            traces = [TraceSchema.from_trace(trace) for trace in result.traces]
        return ExperimentResponse(summary=SummarySchema.from_summary(result.summary), traces=traces)

    return app
