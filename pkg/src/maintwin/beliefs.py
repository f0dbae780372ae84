"""Belief tracking over the discrete state space.

The belief is a categorical distribution over states. Assimilation follows
the predictor-corrector pattern: push the belief through the transition
matrix of the action just taken, then reweight by the observation
likelihood and renormalize. Forecasting unrolls the same machinery under a
fixed policy, without observations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import EvidenceConflict, ValidationError
from .transitions import TransitionMatrix

if TYPE_CHECKING:
    from .environment import ConfusionMatrix
    from .planning import Policy

_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Belief:
    """Normalized categorical distribution over states."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1:
            raise ValidationError("belief must be a vector")
        if (probs < 0).any():
            raise ValidationError("belief entries must be non-negative")
        if abs(probs.sum() - 1.0) > _SUM_TOL:
            raise ValidationError(f"belief must sum to 1, got {probs.sum()!r}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, n: int) -> "Belief":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point(cls, n: int, state: int) -> "Belief":
        probs = np.zeros(n)
        probs[state] = 1.0
        return cls(probs)

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    @property
    def map_state(self) -> int:
        """Most probable state; ties break toward the lowest index."""
        return int(np.argmax(self.probs))


@dataclass(frozen=True, eq=False)
class Forecast:
    """Predicted state and action beliefs for steps ``start + 1 .. end``."""

    start: int
    state_beliefs: tuple[Belief, ...]
    action_beliefs: tuple[np.ndarray, ...]

    @property
    def end(self) -> int:
        return self.start + len(self.state_beliefs)


def predict(belief: Belief, matrix: TransitionMatrix) -> Belief:
    """Push the belief one step forward through a transition matrix."""
    if matrix.n != belief.n:
        raise ValidationError(f"matrix size {matrix.n} does not match belief size {belief.n}")
    return Belief(matrix.entries @ belief.probs)


def correct(belief: Belief, likelihood: np.ndarray | Sequence[float]) -> Belief:
    """Reweight the belief by an observation likelihood and renormalize."""
    likelihood = np.asarray(likelihood, dtype=float)
    if likelihood.shape != belief.probs.shape:
        raise ValidationError("likelihood must have one entry per state")
    if (likelihood < 0).any():
        raise ValidationError("likelihood entries must be non-negative")
    weighted = belief.probs * likelihood
    total = weighted.sum()
    if total <= 0.0:
        raise EvidenceConflict(
            "observation has zero probability under the predicted belief; "
            "retry with perturbed transition matrices"
        )
    return Belief(weighted / total)


def assimilate(
    belief: Belief,
    action: int,
    obs_label: int,
    matrices: Sequence[TransitionMatrix],
    channel: "ConfusionMatrix",
) -> Belief:
    """One predictor-corrector step for the given action and observation."""
    if not 0 <= action < len(matrices):
        raise ValidationError(f"action {action} has no transition matrix")
    predicted = predict(belief, matrices[action])
    return correct(predicted, channel.likelihood_column(obs_label))


def forecast(
    belief: Belief,
    policy: "Policy",
    matrices: Sequence[TransitionMatrix],
    start: int,
    end: int,
) -> Forecast:
    """Unroll the belief under a policy from ``start`` to ``end``.

    At each step the belief is partitioned by the policy's action choice,
    each partition is pushed through its action's matrix, and the mixture
    is renormalized. Action beliefs report the probability of each action
    being selected at steps ``start + 1 .. end``.
    """
    if end <= start:
        raise ValidationError("prediction horizon must extend past the current step")
    if not (policy.covers(start) and policy.covers(end)):
        raise ValidationError(
            f"policy defined on [{policy.t_start}, {policy.t_end}] cannot forecast "
            f"over [{start}, {end}]"
        )
    n_actions = len(matrices)
    states: list[Belief] = []
    actions: list[np.ndarray] = []
    current = belief
    for t in range(start, end):
        assignment = policy.action_row(t)
        nxt = np.zeros(current.n)
        for action in range(n_actions):
            mask = assignment == action
            if mask.any():
                nxt += matrices[action].entries @ np.where(mask, current.probs, 0.0)
        current = Belief(nxt / nxt.sum())
        states.append(current)
        upcoming = policy.action_row(t + 1)
        action_belief = np.zeros(n_actions)
        np.add.at(action_belief, upcoming, current.probs)
        actions.append(action_belief)
    return Forecast(start, tuple(states), tuple(actions))
