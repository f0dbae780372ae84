"""Reward model and finite-horizon policy optimization.

Rewards decompose into a health term charged on the occupied state and a
weighted control term charged on the chosen action. Policies are
non-stationary: backward induction over the remaining horizon yields a
time-indexed action table together with the optimal value of every state.
The objective is the undiscounted sum of rewards up to and including the
final step, whose value is the best immediate reward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .beliefs import Belief
from .errors import ValidationError
from .state_space import StateSpace
from .transitions import TransitionMatrix


def default_health_curve(severity: float) -> float:
    """Steeply decreasing reward for a damaged state of given severity."""
    return -math.exp(5.0 * severity) + 4.0


@dataclass(frozen=True)
class RewardConfig:
    """Per-action control rewards plus the health reward pieces."""

    control: tuple[float, ...]
    health_ok: float = 0.0
    health_failure: float = -250.0
    health_curve: Callable[[float], float] = field(default=default_health_curve)
    control_weight: float = 1.0

    def __post_init__(self) -> None:
        if len(self.control) < 1:
            raise ValidationError("need a control reward for every action")
        if not math.isfinite(self.control_weight):
            raise ValidationError("control weight must be finite")


def health_reward(config: RewardConfig, space: StateSpace, state: int, failed: bool = False) -> float:
    """Health component: evaluated at the state's interval midpoint.

    ``failed`` marks a system whose true severity sits at or beyond the
    covered range; it overrides the state-based value.
    """
    if failed:
        return config.health_failure
    if state == 0:
        return config.health_ok
    _, level = space.location_level_of(state)
    return config.health_curve(space.midpoint(level))


def reward(
    config: RewardConfig,
    space: StateSpace,
    state: int,
    action: int,
    failed: bool = False,
) -> float:
    """Immediate reward for choosing ``action`` while occupying ``state``."""
    if not 0 <= action < len(config.control):
        raise ValidationError(f"action {action} has no control reward")
    return health_reward(config, space, state, failed) + config.control_weight * config.control[action]


def reward_table(config: RewardConfig, space: StateSpace) -> np.ndarray:
    """Dense (state, action) reward table used by the planner.

    The terminal severity level absorbs every beyond-range severity, so
    planning charges it the failure reward; all other levels use their
    interval midpoints.
    """
    return np.array(
        [
            [
                reward(config, space, d, u, failed=(d != 0 and space.is_terminal_level(d)))
                for u in range(len(config.control))
            ]
            for d in range(space.n_states)
        ]
    )


@dataclass(frozen=True, eq=False)
class Policy:
    """Time-indexed action table with the matching state values."""

    t_start: int
    t_end: int
    actions: np.ndarray  # (t_end - t_start + 1, n_states)
    values: np.ndarray  # same shape

    def __post_init__(self) -> None:
        expected = (self.t_end - self.t_start + 1, self.actions.shape[1])
        if self.actions.shape != expected or self.values.shape != expected:
            raise ValidationError("policy tables must cover every step of the horizon")

    def covers(self, t: int) -> bool:
        return self.t_start <= t <= self.t_end

    def _row(self, t: int) -> int:
        if not self.covers(t):
            raise ValidationError(f"time {t} outside the policy horizon [{self.t_start}, {self.t_end}]")
        return t - self.t_start

    def action_row(self, t: int) -> np.ndarray:
        return self.actions[self._row(t)]

    def value_row(self, t: int) -> np.ndarray:
        return self.values[self._row(t)]


def backup(
    matrices: Sequence[TransitionMatrix],
    rewards: np.ndarray,
    next_values: np.ndarray,
) -> np.ndarray:
    """One-step lookahead: Q[d, u] = R[d, u] + sum_d' p(d' | d, u) V(d').

    The reward is charged on the current state, so it factors out of the
    expectation over arrivals.
    """
    return np.stack(
        [rewards[:, u] + matrices[u].entries.T @ next_values for u in range(len(matrices))],
        axis=1,
    )


def value_iteration(
    matrices: Sequence[TransitionMatrix],
    rewards: np.ndarray,
    t_start: int,
    t_end: int,
) -> Policy:
    """Backward induction over the horizon ``[t_start, t_end]``.

    The final step earns the best immediate reward; earlier steps maximize
    immediate reward plus the expected continuation value. Ties break
    toward the lowest action index.
    """
    rewards = np.asarray(rewards, dtype=float)
    if t_end < t_start:
        raise ValidationError("horizon end must not precede its start")
    n_states = rewards.shape[0]
    if len(matrices) != rewards.shape[1]:
        raise ValidationError("need one transition matrix per action")
    for matrix in matrices:
        if matrix.n != n_states:
            raise ValidationError("transition matrices must match the reward table size")
    steps = t_end - t_start + 1
    actions = np.zeros((steps, n_states), dtype=np.int64)
    values = np.zeros((steps, n_states))
    actions[-1] = rewards.argmax(axis=1)
    values[-1] = rewards.max(axis=1)
    for row in range(steps - 2, -1, -1):
        q = backup(matrices, rewards, values[row + 1])
        actions[row] = q.argmax(axis=1)
        values[row] = q.max(axis=1)
    return Policy(t_start, t_end, actions, values)


def select_action(policy: Policy, t: int, belief: Belief) -> int:
    """Action with the most belief mass under the policy's step-``t`` table."""
    assignment = policy.action_row(t)
    if assignment.shape[0] != belief.n:
        raise ValidationError("belief size does not match the policy's state count")
    masses = np.bincount(assignment, weights=belief.probs, minlength=int(assignment.max()) + 1)
    return int(np.argmax(masses))
