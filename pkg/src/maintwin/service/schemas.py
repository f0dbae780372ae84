"""Pydantic request/response models for the HTTP service.

The configuration schema mirrors the JSON configuration file; semantic
validation stays in :mod:`maintwin.config`, so the service and the file
loader reject exactly the same payloads.
"""

from __future__ import annotations

from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, Field

from ..episode import (
    ActionConvergence,
    EpisodeTrace,
    ExperimentSummary,
    ForecastRecord,
    ModeSummary,
    RunRecord,
    StepRecord,
)


class StateSpaceSchema(BaseModel):
    n_locations: int
    interval_bounds: list[float]


class BetaPriorSchema(BaseModel):
    a: float
    b: float


class PriorSchema(BaseModel):
    alpha: Optional[list[float]] = None
    beta: Optional[BetaPriorSchema] = None


class ActionSchema(BaseModel):
    name: str
    kind: str
    max_step: int = 0
    prior: Optional[PriorSchema] = None
    epsilon: float = 1e-6
    statistic: str = "mean"
    matrix: Optional[list[list[float]]] = None


class RewardsSchema(BaseModel):
    control: dict[str, float]
    health_ok: float = 0.0
    health_failure: float = -250.0
    health_exp_rate: float = 5.0
    health_exp_offset: float = 4.0
    control_weight: float = 1.0


class DriftSchema(BaseModel):
    mean: float = 0.02
    std: float = 0.005


class EnvironmentSchema(BaseModel):
    initiation: dict[str, list[float]] = Field(default_factory=dict)
    true_alpha: dict[str, list[float]] = Field(default_factory=dict)
    drift: DriftSchema = Field(default_factory=DriftSchema)
    init_severity_range: Optional[list[float]] = None


class ObservationSchema(BaseModel):
    source: Literal["synthetic", "file", "matrix"] = "synthetic"
    accuracy: float = 1.0
    adjacent_mass: float = 0.0
    path: Optional[str] = None
    entries: Optional[list[list[float]]] = None


class HorizonSchema(BaseModel):
    steps: int
    prediction_depth: int = 5
    forecast_at: Union[Literal["final", "none"], list[int]] = "final"


class ExperimentSchema(BaseModel):
    modes: list[str] = ["adaptive", "static"]
    seeds: Optional[list[int]] = None
    runs: Optional[int] = None
    recompute_every: int = 1


class ConfigSchema(BaseModel):
    state_space: StateSpaceSchema
    actions: list[ActionSchema]
    rewards: RewardsSchema
    environment: EnvironmentSchema
    observation: ObservationSchema
    horizon: HorizonSchema
    experiment: ExperimentSchema

    def to_payload(self) -> dict[str, Any]:
        payload = self.model_dump(exclude_none=True)
        for action in payload["actions"]:
            prior = action.get("prior")
            if prior is not None and not prior:
                action.pop("prior")
        experiment = payload["experiment"]
        if "seeds" in experiment and "runs" in experiment:
            experiment.pop("runs")
        return payload


class ValidateRequest(BaseModel):
    config: ConfigSchema


class ValidateResponse(BaseModel):
    valid: bool
    n_states: int
    n_actions: int
    horizon: int
    modes: list[str]
    seeds: list[int]


class EpisodeRequest(BaseModel):
    config: ConfigSchema
    seed: int = 0
    mode: Literal["adaptive", "static"] = "adaptive"


class StepSchema(BaseModel):
    t: int
    location: int
    severity: float
    failed: bool
    true_state: int
    observed: int
    map_state: int
    action: int
    reward: float
    cumulative_reward: float
    belief: list[float]
    posteriors: list[list[float]]


class ForecastSchema(BaseModel):
    start: int
    state_beliefs: list[list[float]]
    action_beliefs: list[list[float]]


class TraceSchema(BaseModel):
    mode: str
    seed: int
    action_names: list[str]
    steps: list[StepSchema]
    forecasts: list[ForecastSchema]
    true_step_probs: list[list[float]]
    cumulative_reward: float
    ever_failed: bool

    @classmethod
    def from_trace(cls, trace: EpisodeTrace) -> "TraceSchema":
        return cls(
            mode=trace.mode,
            seed=trace.seed,
            action_names=list(trace.action_names),
            steps=[StepSchema(**_step_dict(s)) for s in trace.steps],
            forecasts=[
                ForecastSchema(
                    start=fc.start,
                    state_beliefs=[list(b) for b in fc.state_beliefs],
                    action_beliefs=[list(a) for a in fc.action_beliefs],
                )
                for fc in trace.forecasts
            ],
            true_step_probs=[list(p) for p in trace.true_step_probs],
            cumulative_reward=trace.cumulative_reward,
            ever_failed=trace.ever_failed,
        )

    def to_trace(self) -> EpisodeTrace:
        return EpisodeTrace(
            mode=self.mode,
            seed=self.seed,
            action_names=tuple(self.action_names),
            steps=tuple(
                StepRecord(
                    t=s.t,
                    location=s.location,
                    severity=s.severity,
                    failed=s.failed,
                    true_state=s.true_state,
                    observed=s.observed,
                    map_state=s.map_state,
                    action=s.action,
                    reward=s.reward,
                    cumulative_reward=s.cumulative_reward,
                    belief=tuple(s.belief),
                    posteriors=tuple(tuple(p) for p in s.posteriors),
                )
                for s in self.steps
            ),
            forecasts=tuple(
                ForecastRecord(
                    start=fc.start,
                    state_beliefs=tuple(tuple(b) for b in fc.state_beliefs),
                    action_beliefs=tuple(tuple(a) for a in fc.action_beliefs),
                )
                for fc in self.forecasts
            ),
            true_step_probs=tuple(tuple(p) for p in self.true_step_probs),
            cumulative_reward=self.cumulative_reward,
            ever_failed=self.ever_failed,
        )


def _step_dict(step: StepRecord) -> dict[str, Any]:
    return {
        "t": step.t,
        "location": step.location,
        "severity": step.severity,
        "failed": step.failed,
        "true_state": step.true_state,
        "observed": step.observed,
        "map_state": step.map_state,
        "action": step.action,
        "reward": step.reward,
        "cumulative_reward": step.cumulative_reward,
        "belief": list(step.belief),
        "posteriors": [list(p) for p in step.posteriors],
    }


class EpisodeResponse(BaseModel):
    trace: TraceSchema


class ExperimentRequest(BaseModel):
    config: ConfigSchema
    runs: Optional[int] = None
    modes: Optional[list[str]] = None
    include_traces: bool = False


class ConvergenceSchema(BaseModel):
    action: str
    times_taken: int
    prior_distance: float
    posterior_distance: float
    prior: list[float]
    posterior: list[float]
    true_probs: list[float]


class RunSchema(BaseModel):
    seed: int
    final_reward: float
    ever_failed: bool
    convergence: list[ConvergenceSchema]


class ModeSummarySchema(BaseModel):
    mode: str
    mean_cumulative: list[float]
    std_cumulative: list[float]
    runs: list[RunSchema]
    failure_rate: float


class SummarySchema(BaseModel):
    horizon: int
    seeds: list[int]
    modes: list[ModeSummarySchema]

    @classmethod
    def from_summary(cls, summary: ExperimentSummary) -> "SummarySchema":
        return cls(
            horizon=summary.horizon,
            seeds=list(summary.seeds),
            modes=[
                ModeSummarySchema(
                    mode=mode.mode,
                    mean_cumulative=list(mode.mean_cumulative),
                    std_cumulative=list(mode.std_cumulative),
                    runs=[
                        RunSchema(
                            seed=run.seed,
                            final_reward=run.final_reward,
                            ever_failed=run.ever_failed,
                            convergence=[
                                ConvergenceSchema(
                                    action=c.action,
                                    times_taken=c.times_taken,
                                    prior_distance=c.prior_distance,
                                    posterior_distance=c.posterior_distance,
                                    prior=list(c.prior),
                                    posterior=list(c.posterior),
                                    true_probs=list(c.true_probs),
                                )
                                for c in run.convergence
                            ],
                        )
                        for run in mode.runs
                    ],
                    failure_rate=mode.failure_rate,
                )
                for mode in summary.modes
            ],
        )

    def to_summary(self) -> ExperimentSummary:
        return ExperimentSummary(
            horizon=self.horizon,
            seeds=tuple(self.seeds),
            modes=tuple(
                ModeSummary(
                    mode=mode.mode,
                    mean_cumulative=tuple(mode.mean_cumulative),
                    std_cumulative=tuple(mode.std_cumulative),
                    runs=tuple(
                        RunRecord(
                            seed=run.seed,
                            final_reward=run.final_reward,
                            ever_failed=run.ever_failed,
                            convergence=tuple(
                                ActionConvergence(
                                    action=c.action,
                                    times_taken=c.times_taken,
                                    prior_distance=c.prior_distance,
                                    posterior_distance=c.posterior_distance,
                                    prior=tuple(c.prior),
                                    posterior=tuple(c.posterior),
                                    true_probs=tuple(c.true_probs),
                                )
                                for c in run.convergence
                            ),
                        )
                        for run in mode.runs
                    ),
                    failure_rate=mode.failure_rate,
                )
                for mode in self.modes
            ),
        )


class ExperimentResponse(BaseModel):
    summary: SummarySchema
    traces: Optional[list[TraceSchema]] = None
