"""Synthetic ground truth and the noisy observation channel.

The true condition is continuous: a damage location plus a severity
fraction. Degrading actions initiate damage from the intact condition and
then grow severity by random level-sized jumps plus a small positive
drift; improving actions shrink severity symmetrically, clamped at the
lowest damaged severity; a reset action restores the intact condition.

Observations are state labels drawn from a row-stochastic confusion
matrix standing in for an upstream classifier.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ValidationError
from .state_space import StateSpace
from .transitions import ActionKind, ActionModel

LEVEL_STEP = 0.1  # severity jump per step of the true degradation process

_ROW_TOL = 1e-6


@dataclass(frozen=True)
class GroundTruth:
    """True condition: damage location, severity fraction, failure marker."""

    location: int = 0
    severity: float = 0.0
    failed: bool = False

    def __post_init__(self) -> None:
        if self.location == 0 and self.severity != 0.0:
            raise ValidationError("intact condition must carry zero severity")
        if self.location != 0 and self.severity <= 0.0:
            raise ValidationError("damaged condition must carry positive severity")

    @classmethod
    def intact(cls) -> "GroundTruth":
        return cls()


@dataclass(frozen=True)
class EnvModel:
    """Parameters of the unknown true evolution, per action.

    ``initiation`` maps degrading action ids to a categorical over
    {stay intact} + locations. ``true_alpha`` maps learnable action ids to
    the Dirichlet concentrations from which the episode's true step
    probabilities are drawn. Drift is the truncated-normal severity creep
    added on top of level jumps; its mean is negated for improvements.
    """

    initiation: Mapping[int, tuple[float, ...]]
    true_alpha: Mapping[int, tuple[float, ...]]
    drift_mean: float = 0.02
    drift_std: float = 0.005
    init_severity_range: tuple[float, float] = (0.30, 0.35)

    def __post_init__(self) -> None:
        for action, probs in self.initiation.items():
            arr = np.asarray(probs, dtype=float)
            if (arr < 0).any() or abs(arr.sum() - 1.0) > 1e-9:
                raise ValidationError(f"initiation distribution for action {action} must sum to 1")
        for action, alpha in self.true_alpha.items():
            if any(a <= 0 for a in alpha):
                raise ValidationError(f"true concentrations for action {action} must be positive")
        if self.drift_std < 0:
            raise ValidationError("drift standard deviation must be non-negative")
        lo, hi = self.init_severity_range
        if not lo < hi:
            raise ValidationError("initiation severity range must be non-empty")


def sample_true_params(model: EnvModel, rng: np.random.Generator) -> dict[int, np.ndarray]:
    """Draw the episode's true step probabilities, one vector per action.

    Drawn once per episode and held fixed: the environment is a stationary
    target the learner's posterior should approach.
    """
    return {
        action: rng.dirichlet(np.asarray(model.true_alpha[action], dtype=float))
        for action in sorted(model.true_alpha)
    }


def step_truth(
    space: StateSpace,
    truth: GroundTruth,
    action: ActionModel,
    model: EnvModel,
    step_probs: np.ndarray | None,
    rng: np.random.Generator,
) -> GroundTruth:
    """Advance the true condition one step under the given action."""
    if action.kind is ActionKind.RESET:
        return GroundTruth.intact()
    if action.kind is ActionKind.DEGRADE:
        if truth.location == 0:
            initiation = np.asarray(model.initiation[action.action], dtype=float)
            location = int(rng.choice(initiation.shape[0], p=initiation))
            if location == 0:
                return truth
            severity = float(rng.uniform(*model.init_severity_range))
            return GroundTruth(location, severity, severity >= space.severity_max)
        if step_probs is None:
            raise ValidationError(f"action {action.name!r}: true step probabilities are required")
        jump = int(rng.choice(step_probs.shape[0], p=step_probs))
        drift = max(0.0, float(rng.normal(model.drift_mean, model.drift_std)))
        severity = truth.severity + LEVEL_STEP * jump + drift
        return GroundTruth(truth.location, severity, severity >= space.severity_max)
    if action.kind is ActionKind.IMPROVE:
        if truth.location == 0:
            return truth
        if step_probs is None:
            raise ValidationError(f"action {action.name!r}: true step probabilities are required")
        jump = int(rng.choice(step_probs.shape[0], p=step_probs))
        slack = min(0.0, float(rng.normal(-model.drift_mean, model.drift_std)))
        severity = max(space.severity_min, truth.severity - LEVEL_STEP * jump + slack)
        return GroundTruth(truth.location, severity, severity >= space.severity_max)
    # frozen-matrix actions carry no true evolution model; leave the truth alone
    return truth


def true_state_of(space: StateSpace, truth: GroundTruth) -> int:
    """Project the continuous condition onto its state index."""
    if truth.location == 0:
        return 0
    return space.index_of(truth.location, space.interval_of(truth.severity))


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Row-stochastic observation channel: row = true state, column = label."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValidationError("confusion matrix must be square")
        if (entries < 0).any():
            raise ValidationError("confusion entries must be non-negative")
        sums = entries.sum(axis=1)
        if np.abs(sums - 1.0).max() > _ROW_TOL:
            raise ValidationError(
                f"rows must sum to 1 (worst deviation {np.abs(sums - 1.0).max():.3e})"
            )
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def likelihood_column(self, label: int) -> np.ndarray:
        """p(label | state) for every state; the corrector's weights."""
        if not 0 <= label < self.n:
            raise ValidationError(f"label {label} outside [0, {self.n})")
        return self.entries[:, label].copy()

    def emit(self, true_state: int, rng: np.random.Generator) -> int:
        """Sample a label from the true state's row."""
        if not 0 <= true_state < self.n:
            raise ValidationError(f"state {true_state} outside [0, {self.n})")
        return int(rng.choice(self.n, p=self.entries[true_state]))


def synth_confusion(space: StateSpace, accuracy: float, adjacent_mass: float = 0.0) -> ConfusionMatrix:
    """Build a classifier stand-in with a given diagonal accuracy.

    Each row puts ``accuracy`` on the true state, splits ``adjacent_mass``
    over same-location neighbouring levels, and spreads the remainder
    uniformly over all other states. Rows without neighbours (the intact
    state, single-level spaces) fold the adjacent mass into the remainder.
    """
    if not 0 < accuracy <= 1:
        raise ValidationError("accuracy must lie in (0, 1]")
    if adjacent_mass < 0 or accuracy + adjacent_mass > 1 + 1e-12:
        raise ValidationError("accuracy plus adjacent mass must not exceed 1")
    n = space.n_states
    entries = np.zeros((n, n))
    for state in range(n):
        row = entries[state]
        row[state] = accuracy
        location, level = space.location_level_of(state)
        neighbours = []
        if location != 0:
            if level > 1:
                neighbours.append(space.index_of(location, level - 1))
            if level < space.n_levels:
                neighbours.append(space.index_of(location, level + 1))
        remainder = 1.0 - accuracy
        if neighbours:
            for neighbour in neighbours:
                row[neighbour] = adjacent_mass / len(neighbours)
            remainder -= adjacent_mass
        others = [s for s in range(n) if s != state and s not in neighbours]
        if others:
            row[others] = remainder / len(others)
        elif remainder > 1e-12:
            raise ValidationError("no off-diagonal states left to carry the remaining mass")
        row /= row.sum()
    return ConfusionMatrix(entries)


def load_confusion(path: str, n_states: int) -> ConfusionMatrix:
    """Read a confusion matrix from a whitespace-separated text file."""
    try:
        entries = np.loadtxt(path, dtype=float, ndmin=2)
    except OSError as exc:
        raise ValidationError(f"cannot read confusion matrix from {path}: {exc}") from exc
    except ValueError as exc:
        raise ValidationError(f"malformed confusion matrix in {path}: {exc}") from exc
    if entries.shape != (n_states, n_states):
        raise ValidationError(
            f"confusion matrix in {path} has shape {entries.shape}, "
            f"expected ({n_states}, {n_states})"
        )
    return ConfusionMatrix(entries)
