"""The online decision loop and multi-seed experiments.

Each episode runs the full cycle once per step: the environment emits a
noisy state label, the belief assimilates it, the most probable state is
appended to the observed history, the transition posteriors are re-tallied
from that history (adaptive mode only), the policy is re-solved over the
remaining horizon, and the selected action is applied to the environment.

The static variant solves the planning problem once at the start from the
prior-parameterized matrices and never updates the posteriors, while still
tracking the belief.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .beliefs import Belief, Forecast, assimilate, correct, forecast
from .config import ExperimentConfig
from .environment import GroundTruth, sample_true_params, step_truth, true_state_of
from .errors import EvidenceConflict, ValidationError
from .planning import Policy, reward, reward_table, select_action, value_iteration
from .transitions import (
    ActionKind,
    Params,
    StepCounts,
    action_matrices,
    dirichlet_statistic,
    perturb_normalize,
    tally_step_counts,
    update_params,
)

logger = logging.getLogger(__name__)

_RETRY_EPSILON = 1e-6


@dataclass(frozen=True)
class StepRecord:
    """Everything observed, believed, decided, and earned at one step."""

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
    belief: tuple[float, ...]
    posteriors: tuple[tuple[float, ...], ...]  # per action; empty for unlearned ones


@dataclass(frozen=True)
class ForecastRecord:
    """Flattened forecast attached at a checkpoint step."""

    start: int
    state_beliefs: tuple[tuple[float, ...], ...]
    action_beliefs: tuple[tuple[float, ...], ...]

    @classmethod
    def from_forecast(cls, fc: Forecast) -> "ForecastRecord":
        return cls(
            start=fc.start,
            state_beliefs=tuple(tuple(float(p) for p in b.probs) for b in fc.state_beliefs),
            action_beliefs=tuple(tuple(float(p) for p in a) for a in fc.action_beliefs),
        )


@dataclass(frozen=True)
class EpisodeTrace:
    """Per-step record of one episode plus episode-level outcomes."""

    mode: str
    seed: int
    action_names: tuple[str, ...]
    steps: tuple[StepRecord, ...]
    forecasts: tuple[ForecastRecord, ...]
    true_step_probs: tuple[tuple[float, ...], ...]  # per action; empty for unlearned ones
    cumulative_reward: float
    ever_failed: bool


def _params_tuple(params: Params | None) -> tuple[float, ...]:
    if params is None:
        return ()
    if hasattr(params, "alpha"):
        return tuple(float(a) for a in params.alpha)
    return (float(params.a), float(params.b))


def _tally_posteriors(
    config: ExperimentConfig,
    map_history: Sequence[int],
    action_history: Sequence[int],
) -> dict[int, Params]:
    """Re-tally the full observed history into per-action posteriors."""
    posteriors: dict[int, Params] = {}
    for model in config.actions:
        if not model.learnable:
            continue
        counts, _ = tally_step_counts(
            config.space, map_history, action_history, model.action, model.kind, model.max_step
        )
        posteriors[model.action] = update_params(model.prior, counts)
    return posteriors


def _assimilate_with_retry(
    config: ExperimentConfig,
    belief: Belief,
    action: int | None,
    observed: int,
    matrices,
    t: int,
) -> Belief:
    """Predictor-corrector step; on a zero-evidence conflict, retry once
    with (re-)perturbed matrices before giving up."""
    try:
        if action is None:
            return correct(belief, config.confusion.likelihood_column(observed))
        return assimilate(belief, action, observed, matrices, config.confusion)
    except EvidenceConflict:
        if action is None:
            raise EvidenceConflict(
                f"step {t}: initial observation {observed} conflicts with the starting belief"
            ) from None
        logger.warning("step %d: zero-evidence conflict; retrying with perturbed matrices", t)
        epsilon = max(config.actions[action].epsilon, _RETRY_EPSILON)
        retried = [perturb_normalize(m, epsilon) for m in matrices]
        try:
            return assimilate(belief, action, observed, retried, config.confusion)
        except EvidenceConflict as exc:
            raise EvidenceConflict(f"step {t}: {exc}") from None


def run_episode(config: ExperimentConfig, seed: int, mode: str = "adaptive") -> EpisodeTrace:
    """Run one seeded episode of the full decision loop.

    Deterministic given ``(config, seed, mode)``: all randomness flows
    through one generator, drawn in a fixed order (true step probabilities
    first, then per step one observation and one environment transition).
    """
    if mode not in ("adaptive", "static"):
        raise ValidationError(f"mode must be 'adaptive' or 'static', got {mode!r}")
    adaptive = mode == "adaptive"
    space, horizon = config.space, config.horizon
    rng = np.random.default_rng(seed)
    p_true = sample_true_params(config.env, rng)

    rewards = reward_table(config.rewards, space)
    priors: dict[int, Params] = {
        m.action: m.prior for m in config.actions if m.learnable and m.prior is not None
    }
    posteriors: dict[int, Params] = dict(priors)
    matrices = action_matrices(space, config.actions, posteriors)
    policy = value_iteration(matrices, rewards, 0, horizon.steps)

    truth = GroundTruth.intact()
    belief = Belief.point(space.n_states, 0)
    map_history: list[int] = []
    action_history: list[int] = []
    steps: list[StepRecord] = []
    forecasts: list[ForecastRecord] = []
    cumulative = 0.0
    ever_failed = False

    for t in range(horizon.steps + 1):
        observed = config.confusion.emit(true_state_of(space, truth), rng)
        last_action = action_history[-1] if action_history else None
        belief = _assimilate_with_retry(config, belief, last_action, observed, matrices, t)
        map_history.append(belief.map_state)

        if adaptive and t > 0:
            posteriors = _tally_posteriors(config, map_history, action_history)
            matrices = action_matrices(space, config.actions, posteriors)
            if t % config.settings.recompute_every == 0:
                policy = value_iteration(matrices, rewards, t, horizon.steps)

        chosen = select_action(policy, t, belief)
        step_reward = reward(config.rewards, space, true_state_of(space, truth), chosen, truth.failed)
        cumulative += step_reward
        ever_failed = ever_failed or truth.failed

        steps.append(
            StepRecord(
                t=t,
                location=truth.location,
                severity=truth.severity,
                failed=truth.failed,
                true_state=true_state_of(space, truth),
                observed=observed,
                map_state=belief.map_state,
                action=chosen,
                reward=step_reward,
                cumulative_reward=cumulative,
                belief=tuple(float(p) for p in belief.probs),
                posteriors=tuple(_params_tuple(posteriors.get(m.action)) for m in config.actions),
            )
        )

        if t in horizon.forecast_at:
            end = t + horizon.prediction_depth
            fc_policy = policy if policy.covers(end) else value_iteration(matrices, rewards, t, end)
            fc = forecast(belief, fc_policy, matrices, t, end)
            forecasts.append(ForecastRecord.from_forecast(fc))

        action_history.append(chosen)
        if t < horizon.steps:
            truth = step_truth(space, truth, config.actions[chosen], config.env, p_true.get(chosen), rng)

    return EpisodeTrace(
        mode=mode,
        seed=seed,
        action_names=config.action_names,
        steps=tuple(steps),
        forecasts=tuple(forecasts),
        true_step_probs=tuple(
            tuple(float(p) for p in p_true[m.action]) if m.action in p_true else ()
            for m in config.actions
        ),
        cumulative_reward=cumulative,
        ever_failed=ever_failed,
    )


@dataclass(frozen=True)
class ActionConvergence:
    """How far one action's step-probability estimate sits from the truth."""

    action: str
    times_taken: int
    prior_distance: float
    posterior_distance: float
    prior: tuple[float, ...]
    posterior: tuple[float, ...]
    true_probs: tuple[float, ...]


@dataclass(frozen=True)
class RunRecord:
    seed: int
    final_reward: float
    ever_failed: bool
    convergence: tuple[ActionConvergence, ...]


@dataclass(frozen=True)
class ModeSummary:
    """Cross-run statistics for one mode: cumulative-reward curve moments,
    per-run outcomes, and the share of runs that ever failed."""

    mode: str
    mean_cumulative: tuple[float, ...]
    std_cumulative: tuple[float, ...]
    runs: tuple[RunRecord, ...]
    failure_rate: float


@dataclass(frozen=True)
class ExperimentSummary:
    horizon: int
    seeds: tuple[int, ...]
    modes: tuple[ModeSummary, ...]

    def mode_summary(self, mode: str) -> ModeSummary:
        for summary in self.modes:
            if summary.mode == mode:
                return summary
        raise ValidationError(f"no results for mode {mode!r}")


@dataclass(frozen=True)
class ExperimentResult:
    summary: ExperimentSummary
    traces: tuple[EpisodeTrace, ...]


def _convergence(config: ExperimentConfig, trace: EpisodeTrace) -> tuple[ActionConvergence, ...]:
    records = []
    final = trace.steps[-1]
    for model in config.actions:
        if not model.learnable:
            continue
        true_probs = np.asarray(trace.true_step_probs[model.action])
        prior_probs = dirichlet_statistic(model.prior, "mean")
        posterior_params = final.posteriors[model.action]
        if len(posterior_params) == len(prior_probs):
            posterior_probs = np.asarray(posterior_params) / sum(posterior_params)
        else:  # Beta posterior stored as (a, b): move probability a / (a + b)
            a, b = posterior_params
            posterior_probs = np.asarray([b, a]) / (a + b)
        taken = sum(1 for s in trace.steps[:-1] if s.action == model.action)
        records.append(
            ActionConvergence(
                action=model.name,
                times_taken=taken,
                prior_distance=float(np.abs(prior_probs - true_probs).sum()),
                posterior_distance=float(np.abs(posterior_probs - true_probs).sum()),
                prior=tuple(float(p) for p in prior_probs),
                posterior=tuple(float(p) for p in posterior_probs),
                true_probs=tuple(float(p) for p in true_probs),
            )
        )
    return tuple(records)


def run_experiment(
    config: ExperimentConfig,
    runs: int | None = None,
    modes: Sequence[str] | None = None,
) -> ExperimentResult:
    """Run every requested mode over the seed list and aggregate.

    ``runs`` truncates the configured seed list; statistics (population
    standard deviation, so a single run reports 0) are taken across runs
    at each step of the cumulative-reward curve.
    """
    seeds = config.settings.seeds
    if runs is not None:
        if runs < 1:
            raise ValidationError("runs must be at least 1")
        if runs > len(seeds):
            raise ValidationError(
                f"requested {runs} runs but the configuration pins only {len(seeds)} seeds"
            )
        seeds = seeds[:runs]
    mode_list = tuple(modes) if modes is not None else config.settings.modes
    all_traces: list[EpisodeTrace] = []
    summaries: list[ModeSummary] = []
    for mode in mode_list:
        traces = [run_episode(config, seed, mode) for seed in seeds]
        all_traces.extend(traces)
        curves = np.array([[s.cumulative_reward for s in trace.steps] for trace in traces])
        records = tuple(
            RunRecord(
                seed=trace.seed,
                final_reward=trace.cumulative_reward,
                ever_failed=trace.ever_failed,
                convergence=_convergence(config, trace),
            )
            for trace in traces
        )
        summaries.append(
            ModeSummary(
                mode=mode,
                mean_cumulative=tuple(float(v) for v in curves.mean(axis=0)),
                std_cumulative=tuple(float(v) for v in curves.std(axis=0)),
                runs=records,
                failure_rate=sum(r.ever_failed for r in records) / len(records),
            )
        )
    summary = ExperimentSummary(horizon=config.horizon.steps, seeds=seeds, modes=tuple(summaries))
    return ExperimentResult(summary=summary, traces=tuple(all_traces))
