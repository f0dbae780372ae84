"""Experiment configuration: JSON schema, validation, and the demo setup.

A configuration file is a single JSON object with sections
``state_space``, ``actions``, ``rewards``, ``environment``,
``observation``, ``horizon``, and ``experiment``. ``parse_config`` turns
the raw payload into validated domain objects; every error names the
offending section.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .environment import ConfusionMatrix, EnvModel, load_confusion, synth_confusion
from .errors import ValidationError
from .planning import RewardConfig
from .state_space import StateSpace, build_state_space
from .transitions import ActionKind, ActionModel, BetaParams, DirichletParams, Params

MODES = ("adaptive", "static")


@dataclass(frozen=True)
class HorizonConfig:
    steps: int
    prediction_depth: int = 5
    forecast_at: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.steps < 0:
            raise ValidationError("horizon.steps must be non-negative")
        if self.prediction_depth < 1:
            raise ValidationError("horizon.prediction_depth must be at least 1")
        if any(not 0 <= t <= self.steps for t in self.forecast_at):
            raise ValidationError("horizon.forecast_at entries must lie within [0, steps]")


@dataclass(frozen=True)
class ExperimentSettings:
    modes: tuple[str, ...] = MODES
    seeds: tuple[int, ...] = ()
    recompute_every: int = 1

    def __post_init__(self) -> None:
        if not self.modes:
            raise ValidationError("experiment.modes must not be empty")
        for mode in self.modes:
            if mode not in MODES:
                raise ValidationError(f"experiment.modes: unknown mode {mode!r}")
        if not self.seeds:
            raise ValidationError("experiment needs a seed list or a run count")
        if self.recompute_every < 1:
            raise ValidationError("experiment.recompute_every must be at least 1")


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Validated bundle of everything one experiment needs."""

    space: StateSpace
    actions: tuple[ActionModel, ...]
    rewards: RewardConfig
    env: EnvModel
    confusion: ConfusionMatrix
    horizon: HorizonConfig
    settings: ExperimentSettings

    @property
    def action_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.actions)

    def action_by_name(self, name: str) -> ActionModel:
        for action in self.actions:
            if action.name == name:
                return action
        raise ValidationError(f"unknown action {name!r}")


def _section(payload: Mapping[str, Any], name: str) -> Mapping[str, Any]:
    try:
        section = payload[name]
    except KeyError:
        raise ValidationError(f"missing configuration section {name!r}") from None
    if not isinstance(section, Mapping):
        raise ValidationError(f"section {name!r} must be an object")
    return section


def _parse_prior(name: str, raw: Mapping[str, Any]) -> Params:
    if "alpha" in raw:
        return DirichletParams(tuple(float(a) for a in raw["alpha"]))
    if "beta" in raw:
        beta = raw["beta"]
        return BetaParams(float(beta["a"]), float(beta["b"]))
    raise ValidationError(f"actions[{name}].prior needs an 'alpha' list or a 'beta' object")


def _parse_actions(section: Any) -> tuple[ActionModel, ...]:
    if not isinstance(section, (list, tuple)) or not section:
        raise ValidationError("'actions' must be a non-empty list")
    actions = []
    names = set()
    for idx, raw in enumerate(section):
        name = str(raw.get("name", f"action{idx}"))
        if name in names:
            raise ValidationError(f"duplicate action name {name!r}")
        names.add(name)
        try:
            kind = ActionKind(raw.get("kind", ""))
        except ValueError:
            raise ValidationError(
                f"actions[{name}].kind must be one of "
                f"{[k.value for k in ActionKind]}, got {raw.get('kind')!r}"
            ) from None
        prior = _parse_prior(name, raw["prior"]) if raw.get("prior") is not None else None
        matrix = None
        if raw.get("matrix") is not None:
            matrix = tuple(tuple(float(v) for v in row) for row in raw["matrix"])
        actions.append(
            ActionModel(
                action=idx,
                name=name,
                kind=kind,
                max_step=int(raw.get("max_step", 0)),
                prior=prior,
                epsilon=float(raw.get("epsilon", 1e-6)),
                statistic=str(raw.get("statistic", "mean")),
                matrix=matrix,
            )
        )
    return tuple(actions)


def _parse_rewards(section: Mapping[str, Any], actions: tuple[ActionModel, ...]) -> RewardConfig:
    control_raw = section.get("control")
    if not isinstance(control_raw, Mapping):
        raise ValidationError("rewards.control must map action names to rewards")
    control = []
    for action in actions:
        if action.name not in control_raw:
            raise ValidationError(f"rewards.control is missing action {action.name!r}")
        control.append(float(control_raw[action.name]))
    extra = set(control_raw) - {a.name for a in actions}
    if extra:
        raise ValidationError(f"rewards.control names unknown actions: {sorted(extra)}")
    rate = float(section.get("health_exp_rate", 5.0))
    offset = float(section.get("health_exp_offset", 4.0))

    def health_curve(severity: float, _rate: float = rate, _offset: float = offset) -> float:
        return -math.exp(_rate * severity) + _offset

    return RewardConfig(
        control=tuple(control),
        health_ok=float(section.get("health_ok", 0.0)),
        health_failure=float(section.get("health_failure", -250.0)),
        health_curve=health_curve,
        control_weight=float(section.get("control_weight", 1.0)),
    )


def _parse_environment(
    section: Mapping[str, Any],
    actions: tuple[ActionModel, ...],
    space: StateSpace,
) -> EnvModel:
    by_name = {a.name: a for a in actions}
    initiation = {}
    for name, probs in (section.get("initiation") or {}).items():
        if name not in by_name:
            raise ValidationError(f"environment.initiation names unknown action {name!r}")
        if len(probs) != space.n_locations + 1:
            raise ValidationError(
                f"environment.initiation[{name}] needs {space.n_locations + 1} entries "
                "(stay intact + one per location)"
            )
        arr = np.asarray([float(p) for p in probs], dtype=float)
        initiation[by_name[name].action] = tuple(arr / arr.sum())
    true_alpha = {}
    for name, alpha in (section.get("true_alpha") or {}).items():
        if name not in by_name:
            raise ValidationError(f"environment.true_alpha names unknown action {name!r}")
        true_alpha[by_name[name].action] = tuple(float(a) for a in alpha)
    for action in actions:
        if action.kind is ActionKind.DEGRADE and action.action not in initiation:
            raise ValidationError(f"environment.initiation is missing action {action.name!r}")
        if action.learnable and action.action not in true_alpha:
            raise ValidationError(f"environment.true_alpha is missing action {action.name!r}")
    drift = section.get("drift") or {}
    init_range = section.get("init_severity_range", list(space.bounds[:2]))
    if len(init_range) != 2:
        raise ValidationError("environment.init_severity_range must be a [lo, hi] pair")
    return EnvModel(
        initiation=initiation,
        true_alpha=true_alpha,
        drift_mean=float(drift.get("mean", 0.02)),
        drift_std=float(drift.get("std", 0.005)),
        init_severity_range=(float(init_range[0]), float(init_range[1])),
    )


def _parse_observation(
    section: Mapping[str, Any],
    space: StateSpace,
    base_dir: Path | None,
) -> ConfusionMatrix:
    source = section.get("source", "synthetic")
    if source == "synthetic":
        return synth_confusion(
            space,
            accuracy=float(section.get("accuracy", 1.0)),
            adjacent_mass=float(section.get("adjacent_mass", 0.0)),
        )
    if source == "file":
        if "path" not in section:
            raise ValidationError("observation.path is required for a file source")
        path = Path(section["path"])
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        return load_confusion(str(path), space.n_states)
    if source == "matrix":
        entries = section.get("entries")
        if entries is None:
            raise ValidationError("observation.entries is required for a matrix source")
        matrix = np.asarray(entries, dtype=float)
        if matrix.shape != (space.n_states, space.n_states):
            raise ValidationError(
                f"observation.entries has shape {matrix.shape}, "
                f"expected ({space.n_states}, {space.n_states})"
            )
        return ConfusionMatrix(matrix)
    raise ValidationError(f"observation.source must be 'synthetic', 'file', or 'matrix', got {source!r}")


def _parse_horizon(section: Mapping[str, Any]) -> HorizonConfig:
    steps = int(section.get("steps", 0))
    forecast_at = section.get("forecast_at", "final")
    if forecast_at == "final":
        checkpoints: tuple[int, ...] = (steps,)
    elif forecast_at in (None, "none"):
        checkpoints = ()
    else:
        checkpoints = tuple(int(t) for t in forecast_at)
    return HorizonConfig(
        steps=steps,
        prediction_depth=int(section.get("prediction_depth", 5)),
        forecast_at=checkpoints,
    )


def _parse_experiment(section: Mapping[str, Any]) -> ExperimentSettings:
    modes = tuple(section.get("modes", list(MODES)))
    if "seeds" in section:
        seeds = tuple(int(s) for s in section["seeds"])
    elif "runs" in section:
        seeds = tuple(range(int(section["runs"])))
    else:
        seeds = ()
    return ExperimentSettings(
        modes=modes,
        seeds=seeds,
        recompute_every=int(section.get("recompute_every", 1)),
    )


def parse_config(payload: Mapping[str, Any], base_dir: Path | None = None) -> ExperimentConfig:
    """Validate a raw configuration payload into an :class:`ExperimentConfig`.

    ``base_dir`` anchors relative file paths (normally the directory of the
    configuration file).
    """
    space_raw = _section(payload, "state_space")
    space = build_state_space(
        space_raw.get("n_locations", 0), space_raw.get("interval_bounds", ())
    )
    actions = _parse_actions(payload.get("actions"))
    rewards = _parse_rewards(_section(payload, "rewards"), actions)
    env = _parse_environment(_section(payload, "environment"), actions, space)
    confusion = _parse_observation(_section(payload, "observation"), space, base_dir)
    horizon = _parse_horizon(_section(payload, "horizon"))
    settings = _parse_experiment(_section(payload, "experiment"))
    return ExperimentConfig(space, actions, rewards, env, confusion, horizon, settings)


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a JSON configuration file."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read configuration {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"configuration {path} is not valid JSON: {exc}") from exc
    return parse_config(payload, base_dir=path.parent)


def bridge_payload() -> dict[str, Any]:
    """Canonical railway-bridge demo configuration (37 states, 4 actions).

    Six damageable regions with severity discretized into six intervals
    over [0.30, 0.80]; do-nothing / restrict-operations / minor-repair /
    perfect-repair actions; 60-step horizon; 30 pinned seeds.
    """
    return {
        "state_space": {
            "n_locations": 6,
            "interval_bounds": [0.30, 0.35, 0.45, 0.55, 0.65, 0.75, 0.80],
        },
        "actions": [
            {"name": "DN", "kind": "degrade", "max_step": 2, "prior": {"alpha": [10, 7, 4]}},
            {"name": "RO", "kind": "degrade", "max_step": 2, "prior": {"alpha": [10, 5, 2]}},
            {"name": "MR", "kind": "improve", "max_step": 2, "prior": {"alpha": [3, 10, 9]}},
            {"name": "PR", "kind": "reset"},
        ],
        "rewards": {
            "control": {"DN": 30, "RO": 18, "MR": -75, "PR": -250},
            "health_ok": 0.0,
            "health_failure": -250.0,
            "health_exp_rate": 5.0,
            "health_exp_offset": 4.0,
            "control_weight": 1.0,
        },
        "environment": {
            "initiation": {
                "DN": [1 / 2] + [1 / 12] * 6,
                "RO": [3 / 4] + [1 / 24] * 6,
            },
            "true_alpha": {
                "DN": [500, 400, 200],
                "RO": [600, 300, 100],
                "MR": [1, 100, 300],
            },
            "drift": {"mean": 0.02, "std": 0.005},
            "init_severity_range": [0.30, 0.35],
        },
        "observation": {"source": "synthetic", "accuracy": 0.9139, "adjacent_mass": 0.06},
        "horizon": {"steps": 60, "prediction_depth": 5, "forecast_at": "final"},
        "experiment": {
            "modes": ["adaptive", "static"],
            "seeds": list(range(30)),
            "recompute_every": 1,
        },
    }
