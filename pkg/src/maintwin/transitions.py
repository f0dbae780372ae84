"""Action-conditioned transition models.

Two layers live here:

* Conjugate prior/posterior records for step-transition probabilities:
  a shared step model (stay, move 1, ..., move ``max_step`` levels) with a
  Dirichlet prior, its two-outcome Beta special case, and the fully
  state-dependent Dirichlet table.
* Deterministic builders that turn a step-probability vector into a
  column-stochastic transition matrix over the whole state space, plus the
  uniform perturbation that keeps every transition strictly positive.

Matrices are column-oriented: column = starting state, row = arrival state.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import ValidationError
from .state_space import StateSpace

# Constructor guard; probability vectors coming out of the conjugate
# statistics are normalized to machine precision, config-supplied ones
# only need to be sane.
COLUMN_TOL = 1e-9


@dataclass(frozen=True)
class DirichletParams:
    """Concentration parameters of a Dirichlet over step probabilities."""

    alpha: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.alpha) < 2:
            raise ValidationError("Dirichlet needs at least two components")
        if any(a <= 0 for a in self.alpha):
            raise ValidationError("Dirichlet concentrations must be positive")

    def mean(self) -> np.ndarray:
        alpha = np.asarray(self.alpha, dtype=float)
        return alpha / alpha.sum()

    def mode(self) -> np.ndarray:
        """Interior mode; defined only when every concentration exceeds 1."""
        if any(a <= 1 for a in self.alpha):
            raise ValidationError("Dirichlet mode undefined unless every alpha > 1")
        alpha = np.asarray(self.alpha, dtype=float)
        return (alpha - 1.0) / (alpha.sum() - len(self.alpha))


@dataclass(frozen=True)
class BetaParams:
    """Beta prior over a single move-one-step probability."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if self.a <= 0 or self.b <= 0:
            raise ValidationError("Beta shape parameters must be positive")

    def as_dirichlet(self) -> DirichletParams:
        """Equivalent two-component Dirichlet ordered as (stay, move)."""
        return DirichletParams((self.b, self.a))


Params = Union[DirichletParams, BetaParams]


@dataclass(frozen=True)
class StepCounts:
    """Observed step-transition counts, one bin per step size."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(c < 0 for c in self.counts):
            raise ValidationError("step counts must be non-negative")

    @property
    def total(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class TallyDiagnostics:
    """Bookkeeping for transitions that could not feed the step model.

    ``inconsistent``: impossible under the assumed model for this action
    kind (wrong direction, location change, step beyond ``max_step``).
    ``uninformative``: forced self-transitions out of absorbing states,
    whose likelihood does not depend on the step probabilities.
    """

    considered: int
    counted: int
    inconsistent: int
    uninformative: int


def dirichlet_statistic(params: Params, statistic: str = "mean") -> np.ndarray:
    """Point estimate of the step probabilities from a (posterior) prior."""
    if isinstance(params, BetaParams):
        params = params.as_dirichlet()
    if statistic == "mean":
        return params.mean()
    if statistic == "mode":
        return params.mode()
    raise ValidationError(f"unknown statistic {statistic!r}; expected 'mean' or 'mode'")


def update_dirichlet(prior: DirichletParams, counts: StepCounts) -> DirichletParams:
    """Conjugate update: add observed counts to the concentrations."""
    if len(counts.counts) != len(prior.alpha):
        raise ValidationError(
            f"count vector of length {len(counts.counts)} does not match "
            f"{len(prior.alpha)} concentrations"
        )
    return DirichletParams(tuple(a + c for a, c in zip(prior.alpha, counts.counts)))


def update_beta(prior: BetaParams, stay_count: int, move_count: int) -> BetaParams:
    """Conjugate update of the two-outcome model."""
    if stay_count < 0 or move_count < 0:
        raise ValidationError("counts must be non-negative")
    return BetaParams(prior.a + move_count, prior.b + stay_count)


def update_params(prior: Params, counts: StepCounts) -> Params:
    """Conjugate update dispatching on the prior family."""
    if isinstance(prior, BetaParams):
        if len(counts.counts) != 2:
            raise ValidationError("Beta update needs exactly (stay, move) counts")
        return update_beta(prior, counts.counts[0], counts.counts[1])
    return update_dirichlet(prior, counts)


@dataclass(frozen=True)
class StateDependentDirichlet:
    """One Dirichlet over arrival states per (state, action) pair."""

    table: Mapping[tuple[int, int], DirichletParams]

    def params_for(self, state: int, action: int) -> DirichletParams:
        try:
            return self.table[(state, action)]
        except KeyError:
            raise ValidationError(f"no prior for state {state} under action {action}") from None


def update_state_dependent(
    table: StateDependentDirichlet,
    transitions: Sequence[tuple[int, int, int]],
) -> StateDependentDirichlet:
    """Add arrival-state counts from observed (state, action, next_state) triples."""
    counts: dict[tuple[int, int], np.ndarray] = {}
    for state, action, nxt in transitions:
        params = table.params_for(state, action)
        if not 0 <= nxt < len(params.alpha):
            raise ValidationError(f"arrival state {nxt} outside the prior's support")
        row = counts.setdefault((state, action), np.zeros(len(params.alpha)))
        row[nxt] += 1
    updated = dict(table.table)
    for key, row in counts.items():
        updated[key] = DirichletParams(tuple(a + c for a, c in zip(updated[key].alpha, row)))
    return StateDependentDirichlet(updated)


class ActionKind(str, Enum):
    DEGRADE = "degrade"
    IMPROVE = "improve"
    RESET = "reset"
    FROZEN = "frozen-matrix"


@dataclass(frozen=True)
class ActionModel:
    """Declaration of one control action's assumed transition behaviour."""

    action: int
    name: str
    kind: ActionKind
    max_step: int = 0
    prior: Params | None = None
    epsilon: float = 1e-6
    statistic: str = "mean"
    matrix: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise ValidationError(f"action {self.name!r}: epsilon must be non-negative")
        if self.statistic not in ("mean", "mode"):
            raise ValidationError(f"action {self.name!r}: unknown statistic {self.statistic!r}")
        if self.kind in (ActionKind.DEGRADE, ActionKind.IMPROVE):
            if self.max_step < 1:
                raise ValidationError(f"action {self.name!r}: max_step must be >= 1")
            if self.prior is None:
                raise ValidationError(f"action {self.name!r}: {self.kind.value} needs a prior")
            width = 2 if isinstance(self.prior, BetaParams) else len(self.prior.alpha)
            if width != self.max_step + 1:
                raise ValidationError(
                    f"action {self.name!r}: prior covers {width} step sizes, "
                    f"expected max_step + 1 = {self.max_step + 1}"
                )
        elif self.prior is not None:
            raise ValidationError(f"action {self.name!r}: {self.kind.value} takes no prior")
        if self.kind is ActionKind.FROZEN and self.matrix is None:
            raise ValidationError(f"action {self.name!r}: frozen-matrix needs a matrix")
        if self.kind is not ActionKind.FROZEN and self.matrix is not None:
            raise ValidationError(f"action {self.name!r}: only frozen-matrix takes a matrix")

    @property
    def learnable(self) -> bool:
        return self.kind in (ActionKind.DEGRADE, ActionKind.IMPROVE)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Column-stochastic matrix: entry ``[to, from]`` is p(to | from, action)."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValidationError("transition matrix must be square")
        if (entries < 0).any():
            raise ValidationError("transition probabilities must be non-negative")
        sums = entries.sum(axis=0)
        if np.abs(sums - 1.0).max() > COLUMN_TOL:
            raise ValidationError(
                f"columns must sum to 1 (worst deviation {np.abs(sums - 1.0).max():.3e})"
            )
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def tally_step_counts(
    space: StateSpace,
    state_history: Sequence[int],
    action_history: Sequence[int],
    action: int,
    kind: ActionKind,
    max_step: int,
) -> tuple[StepCounts, TallyDiagnostics]:
    """Count observed step sizes for one action over a state/action history.

    Steps are apparent level differences within a location ladder; an
    initiation (intact -> damaged at level k) counts as a k-step move.
    Arrivals clamped at a ladder edge show up at the apparent step size.
    Transitions the assumed model rules out are reported as inconsistent;
    forced self-transitions out of absorbing states carry no information
    about the step probabilities and are reported as uninformative.
    """
    if len(action_history) != len(state_history) - 1:
        raise ValidationError("need exactly one action per consecutive state pair")
    if kind not in (ActionKind.DEGRADE, ActionKind.IMPROVE):
        raise ValidationError(f"cannot tally step counts for a {kind.value} action")
    bins = np.zeros(max_step + 1, dtype=int)
    considered = inconsistent = uninformative = 0
    for here, taken, nxt in zip(state_history, action_history, state_history[1:]):
        if taken != action:
            continue
        considered += 1
        loc_a, lvl_a = space.location_level_of(here)
        loc_b, lvl_b = space.location_level_of(nxt)
        if kind is ActionKind.DEGRADE:
            if loc_a != 0 and lvl_a == space.n_levels:
                # terminal level is absorbing under degradation
                if nxt == here:
                    uninformative += 1
                else:
                    inconsistent += 1
                continue
            if loc_a == 0:
                step = lvl_b  # 0 when still intact, k for an initiation to level k
            elif loc_b != loc_a:
                inconsistent += 1
                continue
            else:
                step = lvl_b - lvl_a
        else:  # IMPROVE
            if loc_a == 0 or lvl_a == 1:
                # intact and lowest-level states are absorbing under improvement
                if nxt == here:
                    uninformative += 1
                else:
                    inconsistent += 1
                continue
            if loc_b != loc_a:
                inconsistent += 1
                continue
            step = lvl_a - lvl_b
        if 0 <= step <= max_step:
            bins[step] += 1
        else:
            inconsistent += 1
    counted = int(bins.sum())
    return (
        StepCounts(tuple(int(c) for c in bins)),
        TallyDiagnostics(considered, counted, inconsistent, uninformative),
    )


def _degrade_matrix(space: StateSpace, probs: np.ndarray) -> np.ndarray:
    n = space.n_states
    entries = np.zeros((n, n))
    # intact column: stay, or initiate damage at level s split evenly over locations
    entries[0, 0] = probs[0]
    for step in range(1, len(probs)):
        level = min(step, space.n_levels)
        for location in range(1, space.n_locations + 1):
            entries[space.index_of(location, level), 0] += probs[step] / space.n_locations
    for location in range(1, space.n_locations + 1):
        for level in range(1, space.n_levels + 1):
            col = space.index_of(location, level)
            if level == space.n_levels:
                entries[col, col] = 1.0  # absorbing terminal level
                continue
            entries[col, col] = probs[0]
            for step in range(1, len(probs)):
                target = space.index_of(location, min(level + step, space.n_levels))
                entries[target, col] += probs[step]
    return entries


def _improve_matrix(space: StateSpace, probs: np.ndarray) -> np.ndarray:
    n = space.n_states
    entries = np.zeros((n, n))
    entries[0, 0] = 1.0  # nothing to repair
    for location in range(1, space.n_locations + 1):
        for level in range(1, space.n_levels + 1):
            col = space.index_of(location, level)
            if level == 1:
                entries[col, col] = 1.0  # repairs never cross back to intact
                continue
            entries[col, col] = probs[0]
            for step in range(1, len(probs)):
                target = space.index_of(location, max(level - step, 1))
                entries[target, col] += probs[step]
    return entries


def build_matrix(
    space: StateSpace,
    model: ActionModel,
    probs: np.ndarray | Sequence[float] | None = None,
) -> TransitionMatrix:
    """Assemble the transition matrix of one action from step probabilities.

    Degrading actions move mass toward higher severity within each
    location's ladder, with over-the-edge mass accumulating in the
    terminal level; the intact column splits initiation mass evenly
    across locations. Improving actions mirror this toward lower
    severity, clamped at level 1. Reset actions send every state to the
    intact state; frozen-matrix actions use their declared matrix.
    """
    if model.kind is ActionKind.RESET:
        entries = np.zeros((space.n_states, space.n_states))
        entries[0, :] = 1.0
        return TransitionMatrix(entries)
    if model.kind is ActionKind.FROZEN:
        return TransitionMatrix(np.asarray(model.matrix, dtype=float))
    if probs is None:
        raise ValidationError(f"action {model.name!r}: step probabilities are required")
    probs = np.asarray(probs, dtype=float)
    if probs.shape != (model.max_step + 1,):
        raise ValidationError(
            f"action {model.name!r}: expected {model.max_step + 1} step probabilities"
        )
    if (probs < 0).any() or abs(probs.sum() - 1.0) > COLUMN_TOL:
        raise ValidationError(f"action {model.name!r}: step probabilities must sum to 1")
    if model.kind is ActionKind.DEGRADE:
        return TransitionMatrix(_degrade_matrix(space, probs))
    return TransitionMatrix(_improve_matrix(space, probs))


def perturb_normalize(matrix: TransitionMatrix, epsilon: float) -> TransitionMatrix:
    """Add a uniform positive perturbation and renormalize the columns.

    Keeps every transition strictly positive (for ``epsilon > 0``) so that
    evidence contradicting the assumed model cannot zero out the belief.
    ``epsilon = 0`` returns the matrix unchanged.
    """
    if epsilon < 0:
        raise ValidationError("epsilon must be non-negative")
    if epsilon == 0:
        return matrix
    perturbed = matrix.entries + epsilon
    return TransitionMatrix(perturbed / perturbed.sum(axis=0, keepdims=True))


def action_matrices(
    space: StateSpace,
    models: Sequence[ActionModel],
    posteriors: Mapping[int, Params] | None = None,
) -> list[TransitionMatrix]:
    """Build the perturbed matrix of every action from its current parameters.

    ``posteriors`` overrides the priors for learnable actions; reset and
    frozen actions are built from their declarations. Each matrix is
    perturbed by its action's epsilon.
    """
    matrices = []
    for model in models:
        if model.learnable:
            params = model.prior
            if posteriors is not None and model.action in posteriors:
                params = posteriors[model.action]
            probs = dirichlet_statistic(params, model.statistic)
            built = build_matrix(space, model, probs)
        else:
            built = build_matrix(space, model)
        matrices.append(perturb_normalize(built, model.epsilon))
    return matrices
