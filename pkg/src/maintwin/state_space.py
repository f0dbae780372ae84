"""Discrete state space over damage locations and severity intervals.

State 0 is the undamaged baseline. Damaged states are indexed
lexicographically, first by location and then by severity level:
``index = 1 + (location - 1) * n_levels + (level - 1)``.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class StateSpace:
    """Immutable index over damage configurations.

    ``bounds`` are the severity interval edges, strictly increasing.
    Intervals are half-open ``[lo, hi)``; the final interval additionally
    absorbs any severity at or above its upper edge, so over-range
    severities map to the terminal level.
    """

    n_locations: int
    bounds: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.n_locations < 1:
            raise ValidationError("state space needs at least one damageable location")
        if len(self.bounds) < 2:
            raise ValidationError("interval bounds need at least two edges")
        if any(b2 <= b1 for b1, b2 in zip(self.bounds, self.bounds[1:])):
            raise ValidationError("interval bounds must be strictly increasing")

    @property
    def n_levels(self) -> int:
        return len(self.bounds) - 1

    @property
    def n_states(self) -> int:
        return 1 + self.n_levels * self.n_locations

    @property
    def severity_min(self) -> float:
        return self.bounds[0]

    @property
    def severity_max(self) -> float:
        return self.bounds[-1]

    def index_of(self, location: int, level: int = 0) -> int:
        """State index of ``(location, level)``; level is ignored for location 0."""
        if location == 0:
            return 0
        if not 1 <= location <= self.n_locations:
            raise ValidationError(f"location {location} outside [0, {self.n_locations}]")
        if not 1 <= level <= self.n_levels:
            raise ValidationError(f"level {level} outside [1, {self.n_levels}]")
        return 1 + (location - 1) * self.n_levels + (level - 1)

    def location_level_of(self, index: int) -> tuple[int, int]:
        """Inverse of :meth:`index_of`; returns ``(0, 0)`` for the undamaged state."""
        if not 0 <= index < self.n_states:
            raise ValidationError(f"state index {index} outside [0, {self.n_states})")
        if index == 0:
            return (0, 0)
        location, level = divmod(index - 1, self.n_levels)
        return (location + 1, level + 1)

    def interval_of(self, severity: float) -> int:
        """1-based severity level containing ``severity``, clamped at the top."""
        if severity < self.severity_min:
            raise ValidationError(
                f"severity {severity} below the first interval edge {self.severity_min}"
            )
        return min(bisect_right(self.bounds, severity), self.n_levels)

    def midpoint(self, level: int) -> float:
        """Representative severity of a level: the interval midpoint."""
        if not 1 <= level <= self.n_levels:
            raise ValidationError(f"level {level} outside [1, {self.n_levels}]")
        return 0.5 * (self.bounds[level - 1] + self.bounds[level])

    def is_terminal_level(self, index: int) -> bool:
        """True when the state sits at the highest severity level of its location."""
        _, level = self.location_level_of(index)
        return level == self.n_levels

    def state_labels(self) -> list[str]:
        labels = ["intact"]
        for location in range(1, self.n_locations + 1):
            for level in range(1, self.n_levels + 1):
                labels.append(f"loc{location}_lvl{level}")
        return labels


def build_state_space(n_locations: int, interval_bounds: list[float] | tuple[float, ...]) -> StateSpace:
    """Validate and build a :class:`StateSpace` from configuration values."""
    return StateSpace(int(n_locations), tuple(float(b) for b in interval_bounds))
